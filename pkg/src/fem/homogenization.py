"""
Homogenization

Volume-averaged stress, effective bulk modulus and analytic Voigt-Reuss
bounds for two-phase composites.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..errors import InputValidationError, UndefinedBulkModulusError
from ..microstructure import DesignParams
from .assembly import FemSystem, assemble, element_materials, hydrostatic_strain
from .mesh import MU_WEIGHTS, VOIGT_NORMAL, MeshTopology, get_mesh, lame_parameters
from .solver import SolverMethod, solve

logger = logging.getLogger(__name__)

# Voigt component -> (row, column) of the stress tensor
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))


@dataclass
class FemSolution:
    """Displacement field and homogenized response of one grid."""
    u: np.ndarray = field(repr=False)
    avg_stress: np.ndarray
    K: float
    applied_strain: np.ndarray
    system: Optional[FemSystem] = field(default=None, repr=False)
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def nodal_displacements(self) -> np.ndarray:
        """Displacements as (n_nodes, 3)."""
        return self.u.reshape(-1, 3)


def active_trace(tensor: np.ndarray, dims: int) -> float:
    """Trace over the active dimensions (x, y in 2D)."""
    return float(np.trace(np.asarray(tensor)[:dims, :dims]))


def average_stress(mesh: MeshTopology, lam: np.ndarray, mu: np.ndarray, u: np.ndarray) -> np.ndarray:
    """
    Mean of the Gauss-point stresses over all elements.

    Args:
        mesh: Mesh topology
        lam: Per-element first Lame parameter
        mu: Per-element shear modulus
        u: Full DOF vector

    Returns:
        Symmetric 3x3 average stress
    """
    ue = np.asarray(u)[mesh.element_dofs]
    strains = np.einsum("gij,ej->egi", mesh.B, ue)
    volumetric = strains @ VOIGT_NORMAL
    stresses = lam[:, None, None] * volumetric[..., None] * VOIGT_NORMAL + mu[:, None, None] * (strains @ MU_WEIGHTS)
    voigt = stresses.mean(axis=(0, 1))

    tensor = np.zeros((3, 3))
    for component, (row, col) in enumerate(_VOIGT_PAIRS):
        tensor[row, col] = tensor[col, row] = voigt[component]
    return tensor


def modulus_from_stress(avg_stress: np.ndarray, strain: np.ndarray, dims: int) -> float:
    """
    K = tr<sigma> / (d tr eps) over the active dimensions.

    Raises:
        UndefinedBulkModulusError: If tr eps is zero
    """
    strain_trace = active_trace(strain, dims)
    if strain_trace == 0.0:
        raise UndefinedBulkModulusError("Applied strain has zero trace; bulk modulus is undefined")
    return active_trace(avg_stress, dims) / (dims * strain_trace)


def bulk_modulus(grid: np.ndarray, u: np.ndarray, strain: np.ndarray, relaxed: bool = False) -> float:
    """
    Effective bulk modulus of a solved grid.

    Args:
        grid: Normalized grid the displacement was computed for
        u: Full DOF vector
        strain: Applied 3x3 strain
        relaxed: Material handling of element_materials

    Returns:
        K in GPa (plane-stress bulk modulus for 2D grids)
    """
    grid = np.asarray(grid, dtype=np.float64)
    mesh = get_mesh(grid.shape[:-1])
    E, nu, _ = element_materials(grid, relaxed=relaxed)
    lam, mu = lame_parameters(E, nu)
    return modulus_from_stress(average_stress(mesh, lam, mu, u), strain, mesh.dims)


def homogenize(
    grid: np.ndarray,
    strain: Optional[np.ndarray] = None,
    method: Optional[SolverMethod] = None,
    relaxed: bool = False,
) -> FemSolution:
    """
    Assemble, solve and homogenize one grid.

    Args:
        grid: Normalized grid of shape (*shape, 3)
        strain: Applied strain (hydrostatic default)
        method: Solver selection (settings default)
        relaxed: Accept relaxed (non-catalog) materials

    Returns:
        FemSolution keeping the system for adjoint solves
    """
    grid = np.asarray(grid, dtype=np.float64)
    dims = grid.ndim - 1
    strain = hydrostatic_strain(dims) if strain is None else np.asarray(strain, dtype=np.float64)
    if active_trace(strain, dims) == 0.0:
        raise UndefinedBulkModulusError("Applied strain has zero trace; bulk modulus is undefined")

    system = assemble(grid, strain, relaxed=relaxed)
    u = solve(system, method)
    avg = average_stress(system.mesh, system.lam, system.mu, u)
    K = modulus_from_stress(avg, strain, system.mesh.dims)
    return FemSolution(u=u, avg_stress=avg, K=K, applied_strain=strain, system=system, info=dict(system.info))


# =============================================================================
# Analytic references
# =============================================================================

def phase_bulk_modulus(E: float, nu: float, dims: int = 3) -> float:
    """
    Bulk modulus of a homogeneous isotropic phase.

    Args:
        E: Young's modulus (GPa)
        nu: Poisson ratio
        dims: 3 for E / (3 (1 - 2 nu)), 2 for the plane-stress E / (2 (1 - nu))

    Returns:
        Bulk modulus (GPa)
    """
    if E <= 0:
        raise InputValidationError(f"Young's modulus must be positive, got {E}")
    if dims == 3:
        if nu >= 0.5:
            raise InputValidationError(f"Bulk modulus is unbounded for nu={nu}")
        return E / (3.0 * (1.0 - 2.0 * nu))
    if dims == 2:
        if nu >= 1.0:
            raise InputValidationError(f"Plane-stress bulk modulus is unbounded for nu={nu}")
        return E / (2.0 * (1.0 - nu))
    raise InputValidationError(f"dims must be 2 or 3, got {dims}")


def voigt_reuss_bounds(theta: DesignParams, dims: int = 3) -> tuple[float, float]:
    """
    Reuss (lower) and Voigt (upper) bounds on the composite bulk modulus.

    Args:
        theta: Design parameters
        dims: Which phase modulus to use (see phase_bulk_modulus)

    Returns:
        Tuple of (K_lower, K_upper)
    """
    if theta.nu_m >= 0.5 or theta.nu_p >= 0.5:
        raise InputValidationError("Voigt-Reuss bounds are undefined for nu = 0.5")
    K_m = phase_bulk_modulus(theta.E_m, theta.nu_m, dims)
    K_p = phase_bulk_modulus(theta.E_p, theta.nu_p, dims)
    f = theta.f_p
    upper = (1.0 - f) * K_m + f * K_p
    lower = 1.0 / ((1.0 - f) / K_m + f / K_p)
    return lower, upper
