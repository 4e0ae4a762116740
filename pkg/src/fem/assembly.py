"""
Global Assembly

Builds the reduced system A u_free = b for a material grid under a linear
displacement u(q) = eps q prescribed on the boundary.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import scipy.io
import scipy.sparse as sp

from ..config import get_settings
from ..errors import DegenerateMaterialError, InputValidationError
from ..materials import NORMALIZED_SCALE, denormalize
from .mesh import MeshTopology, get_mesh, lame_parameters

logger = logging.getLogger(__name__)


def hydrostatic_strain(dims: int, magnitude: Optional[float] = None) -> np.ndarray:
    """
    Hydrostatic strain eps0 * I over the active dimensions.

    Args:
        dims: 2 (in-plane only) or 3
        magnitude: eps0 (settings default)

    Returns:
        3x3 strain tensor
    """
    magnitude = get_settings().fem_strain if magnitude is None else magnitude
    strain = np.zeros((3, 3))
    strain[:dims, :dims] = magnitude * np.eye(dims)
    return strain


def element_materials(grid: np.ndarray, relaxed: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-element physical (E, nu, rho) of a normalized grid, flattened in C order.

    The Poisson ratio is capped at the configured ceiling. With ``relaxed``
    the Young's modulus is floored just above zero instead of rejected.

    Args:
        grid: Array of shape (*shape, 3) in normalized space
        relaxed: Floor E instead of raising on E <= 0

    Returns:
        Tuple of (E, nu, rho), each of shape (n_elements,)

    Raises:
        DegenerateMaterialError: If an element has E <= 0 and relaxed is False
    """
    grid = np.asarray(grid, dtype=np.float64)
    if not np.all(np.isfinite(grid)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(grid.reshape(-1, 3)), axis=1))[0])
        raise DegenerateMaterialError(bad, "non-finite material values")

    physical = denormalize(grid).reshape(-1, 3)
    E, nu, rho = physical[:, 0].copy(), physical[:, 1].copy(), physical[:, 2].copy()

    if relaxed:
        E = np.maximum(E, minimum_modulus())
    elif np.any(E <= 0):
        element = int(np.flatnonzero(E <= 0)[0])
        raise DegenerateMaterialError(element, f"Young's modulus {E[element]} <= 0")

    ceiling = get_settings().fem_nu_ceiling
    if np.any(nu > ceiling):
        logger.debug(f"Capped Poisson ratio of {int(np.sum(nu > ceiling))} elements at {ceiling}")
        nu = np.minimum(nu, ceiling)
    return E, nu, rho


def minimum_modulus() -> float:
    """Smallest Young's modulus admitted on relaxed grids (1e-6 in normalized units)."""
    return float(1e-6 * NORMALIZED_SCALE[0])


@dataclass
class FemSystem:
    """Reduced stiffness system of one grid."""
    mesh: MeshTopology
    A: sp.csr_matrix = field(repr=False)
    b: np.ndarray = field(repr=False)
    u_prescribed: np.ndarray = field(repr=False)
    strain: np.ndarray
    lam: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    factorization: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def free(self) -> np.ndarray:
        return self.mesh.free

    @property
    def prescribed(self) -> np.ndarray:
        return self.mesh.prescribed

    @property
    def dof_map(self) -> np.ndarray:
        """Boolean Dirichlet mask over all DOFs (True = prescribed)."""
        mask = np.zeros(self.mesh.n_dofs, dtype=bool)
        mask[self.mesh.prescribed] = True
        return mask

    def expand(self, u_free: np.ndarray) -> np.ndarray:
        """Full DOF vector with the Dirichlet values reinstated."""
        u = np.empty(self.mesh.n_dofs)
        u[self.mesh.free] = u_free
        u[self.mesh.prescribed] = self.u_prescribed
        return u

    def element_forces(self, u: np.ndarray) -> np.ndarray:
        """Element nodal forces Ke u_e, shape (n_elements, 24)."""
        ue = u[self.mesh.element_dofs]
        return self.lam[:, None] * (ue @ self.mesh.K_lambda) + self.mu[:, None] * (ue @ self.mesh.K_mu)


def _reduced_matrix(mesh: MeshTopology, lam: np.ndarray, mu: np.ndarray) -> sp.csr_matrix:
    values = lam[:, None] * mesh.K_lambda.ravel() + mu[:, None] * mesh.K_mu.ravel()
    data = np.bincount(
        mesh.pattern_slots,
        weights=values.ravel()[mesh.pattern_entries],
        minlength=mesh.indices.shape[0],
    )
    return sp.csr_matrix((data, mesh.indices, mesh.indptr), shape=(mesh.n_free, mesh.n_free))


def _dump_matrix(A: sp.csr_matrix, directory: str) -> None:
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    existing = len(list(target.glob("stiffness_*.mtx")))
    path = target / f"stiffness_{existing:04d}.mtx"
    scipy.io.mmwrite(str(path), A, comment="reduced stiffness matrix")
    logger.debug(f"Dumped stiffness matrix to {path}")


def assemble(grid: np.ndarray, strain: Optional[np.ndarray] = None, relaxed: bool = False) -> FemSystem:
    """
    Assemble the reduced stiffness system of a grid.

    Dirichlet DOFs are all components of surface nodes (3D) or the in-plane
    components of perimeter nodes plus one thickness DOF (2D plate). They
    are eliminated, giving b = -K_fp u_p.

    Args:
        grid: Array of shape (*shape, 3) in normalized space
        strain: 3x3 applied strain (hydrostatic default)
        relaxed: Accept non-physical E on relaxed grids (see element_materials)

    Returns:
        FemSystem with SPD matrix A

    Raises:
        DegenerateMaterialError: Element with E <= 0
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim not in (3, 4) or grid.shape[-1] != 3:
        raise InputValidationError(f"Expected a (*shape, 3) grid, got shape {grid.shape}")
    mesh = get_mesh(grid.shape[:-1])
    strain = hydrostatic_strain(mesh.dims) if strain is None else np.asarray(strain, dtype=np.float64)
    if strain.shape != (3, 3):
        raise InputValidationError(f"Strain must be 3x3, got {strain.shape}")

    E, nu, _ = element_materials(grid, relaxed=relaxed)
    lam, mu = lame_parameters(E, nu)

    u_all = (mesh.coordinates @ strain.T).ravel()
    u_prescribed = u_all[mesh.prescribed]
    boundary = np.zeros(mesh.n_dofs)
    boundary[mesh.prescribed] = u_prescribed

    system = FemSystem(
        mesh=mesh,
        A=_reduced_matrix(mesh, lam, mu),
        b=np.zeros(mesh.n_free),
        u_prescribed=u_prescribed,
        strain=strain,
        lam=lam,
        mu=mu,
    )
    forces = np.bincount(
        mesh.element_dofs.ravel(),
        weights=system.element_forces(boundary).ravel(),
        minlength=mesh.n_dofs,
    )
    system.b = -forces[mesh.free]

    dump_dir = get_settings().fem_debug_dump_dir
    if dump_dir:
        _dump_matrix(system.A, dump_dir)
    return system
