"""
Voxel Mesh and Element Stiffness

Trilinear 8-node hexahedra on a regular grid over the unit domain. A 2D grid
becomes a one-element-thick plate. Per-mesh quantities (connectivity,
Dirichlet partition, quadrature operators and the sparsity pattern of the
reduced stiffness matrix) are computed once per grid shape and cached.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import InputValidationError

logger = logging.getLogger(__name__)

# Local node a = di*4 + dj*2 + dk sits at reference coordinates 2*(di, dj, dk) - 1
NODE_OFFSETS = np.array([[di, dj, dk] for di in (0, 1) for dj in (0, 1) for dk in (0, 1)])
NODE_SIGNS = 2.0 * NODE_OFFSETS - 1.0
GAUSS_POINTS = NODE_SIGNS / np.sqrt(3.0)

# Voigt order [xx, yy, zz, yz, xz, xy] with engineering shear strains
VOIGT_NORMAL = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
MU_WEIGHTS = np.diag([2.0, 2.0, 2.0, 1.0, 1.0, 1.0])


def lame_parameters(E: np.ndarray | float, nu: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """Lame parameters (lambda, mu) from Young's modulus and Poisson ratio."""
    E = np.asarray(E, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    return lam, mu


def _shape_gradients(point: np.ndarray, size: np.ndarray) -> np.ndarray:
    """Physical shape function gradients (8, 3) at a reference point."""
    terms = 1.0 + NODE_SIGNS * point
    grad = np.empty((8, 3))
    grad[:, 0] = NODE_SIGNS[:, 0] * terms[:, 1] * terms[:, 2]
    grad[:, 1] = terms[:, 0] * NODE_SIGNS[:, 1] * terms[:, 2]
    grad[:, 2] = terms[:, 0] * terms[:, 1] * NODE_SIGNS[:, 2]
    return grad / 8.0 * (2.0 / size)


def _strain_displacement(grad: np.ndarray) -> np.ndarray:
    """Strain-displacement matrix (6, 24) from shape gradients."""
    gx, gy, gz = grad[:, 0], grad[:, 1], grad[:, 2]
    B = np.zeros((6, 24))
    B[0, 0::3] = gx
    B[1, 1::3] = gy
    B[2, 2::3] = gz
    B[3, 1::3] = gz
    B[3, 2::3] = gy
    B[4, 0::3] = gz
    B[4, 2::3] = gx
    B[5, 0::3] = gy
    B[5, 1::3] = gx
    return B


def quadrature_operators(size: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> tuple[np.ndarray, float]:
    """
    Strain-displacement matrices at the 2x2x2 Gauss points.

    Args:
        size: Element edge lengths (hx, hy, hz)

    Returns:
        Tuple of (B of shape (8, 6, 24), Jacobian determinant)
    """
    size = np.asarray(size, dtype=np.float64)
    B = np.stack([_strain_displacement(_shape_gradients(point, size)) for point in GAUSS_POINTS])
    return B, float(np.prod(size) / 8.0)


def stiffness_parts(size: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """
    Split element stiffness Ke = lambda * K_lambda + mu * K_mu.

    Args:
        size: Element edge lengths

    Returns:
        Tuple of (K_lambda, K_mu), each 24x24
    """
    B, det = quadrature_operators(size)
    volumetric = np.einsum("gki,k->gi", B, VOIGT_NORMAL)
    K_lambda = det * np.einsum("gi,gj->ij", volumetric, volumetric)
    K_mu = det * np.einsum("gki,kl,glj->ij", B, MU_WEIGHTS, B)
    return K_lambda, K_mu


def element_stiffness(E: float, nu: float, size: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> np.ndarray:
    """
    Stiffness matrix of one isotropic trilinear hexahedron.

    Args:
        E: Young's modulus (GPa)
        nu: Poisson ratio
        size: Element edge lengths

    Returns:
        Symmetric 24x24 matrix with six rigid-body zero modes

    Raises:
        InputValidationError: If E <= 0 or nu outside (-1, 0.5)
    """
    if E <= 0:
        raise InputValidationError(f"Young's modulus must be positive, got {E}")
    if not -1.0 < nu < 0.5:
        raise InputValidationError(f"Poisson ratio must lie in (-1, 0.5), got {nu}")
    lam, mu = lame_parameters(E, nu)
    K_lambda, K_mu = stiffness_parts(size)
    return float(lam) * K_lambda + float(mu) * K_mu


# =============================================================================
# Mesh topology
# =============================================================================

@dataclass(frozen=True)
class MeshTopology:
    """Connectivity, Dirichlet partition and assembly pattern of one grid shape."""
    grid_shape: tuple[int, ...]
    dims: int
    element_size: tuple[float, float, float]
    node_counts: tuple[int, int, int]
    coordinates: np.ndarray = field(repr=False)
    element_dofs: np.ndarray = field(repr=False)
    free: np.ndarray = field(repr=False)
    prescribed: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    det_jacobian: float
    K_lambda: np.ndarray = field(repr=False)
    K_mu: np.ndarray = field(repr=False)
    active: np.ndarray = field(repr=False)
    # Reduced-matrix CSR pattern and the scatter from element entries into it
    pattern_entries: np.ndarray = field(repr=False)
    pattern_slots: np.ndarray = field(repr=False)
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    @property
    def n_elements(self) -> int:
        return int(self.element_dofs.shape[0])

    @property
    def n_dofs(self) -> int:
        return int(self.coordinates.shape[0] * 3)

    @property
    def n_free(self) -> int:
        return int(self.free.shape[0])

    @property
    def active_dims(self) -> int:
        return int(self.active.sum())

    @property
    def normal_sum(self) -> np.ndarray:
        """Sum over Gauss points of B^T m (24,), i.e. element volumetric strain weights."""
        return np.einsum("gij,i->j", self.B, VOIGT_NORMAL)

    @property
    def active_sum(self) -> np.ndarray:
        """Sum over Gauss points of B^T c for the active normal components (24,)."""
        selector = np.concatenate([self.active.astype(np.float64), np.zeros(3)])
        return np.einsum("gij,i->j", self.B, selector)

    def nodal(self, u: np.ndarray) -> np.ndarray:
        """View a flat DOF vector as (nodes, 3)."""
        return np.asarray(u).reshape(-1, 3)


def _boundary_dofs(coords_index: np.ndarray, counts: tuple[int, int, int], dims: int) -> np.ndarray:
    """Prescribed DOF mask over all DOFs."""
    i, j, k = coords_index.T
    nx, ny, nz = (c - 1 for c in counts)
    mask = np.zeros((coords_index.shape[0], 3), dtype=bool)
    if dims == 3:
        surface = (i == 0) | (i == nx) | (j == 0) | (j == ny) | (k == 0) | (k == nz)
        mask[surface, :] = True
    else:
        perimeter = (i == 0) | (i == nx) | (j == 0) | (j == ny)
        mask[perimeter, :2] = True
        # Thickness DOFs stay free apart from one pinned rigid-body mode
        mask[0, 2] = True
    return mask.ravel()


@lru_cache(maxsize=4)
def get_mesh(grid_shape: tuple[int, ...]) -> MeshTopology:
    """
    Build (or fetch) the mesh topology for a grid shape.

    Args:
        grid_shape: (nx, ny) for a plate or (nx, ny, nz) for a volume

    Returns:
        Cached MeshTopology
    """
    grid_shape = tuple(int(n) for n in grid_shape)
    dims = len(grid_shape)
    if dims not in (2, 3) or min(grid_shape) < 1:
        raise InputValidationError(f"Unsupported grid shape {grid_shape}")

    if dims == 2:
        nx, ny = grid_shape
        nz = 1
        size = (1.0 / nx, 1.0 / ny, 1.0 / nx)
    else:
        nx, ny, nz = grid_shape
        size = (1.0 / nx, 1.0 / ny, 1.0 / nz)
    counts = (nx + 1, ny + 1, nz + 1)

    node_index = np.stack(
        np.meshgrid(*(np.arange(c) for c in counts), indexing="ij"), axis=-1
    ).reshape(-1, 3)
    coordinates = node_index * np.asarray(size)

    ex, ey, ez = (a.ravel() for a in np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"))
    element_nodes = np.stack(
        [((ex + di) * counts[1] + (ey + dj)) * counts[2] + (ez + dk) for di, dj, dk in NODE_OFFSETS],
        axis=1,
    )
    element_dofs = (3 * element_nodes[:, :, None] + np.arange(3)).reshape(-1, 24)

    prescribed_mask = _boundary_dofs(node_index, counts, dims)
    free = np.flatnonzero(~prescribed_mask)
    prescribed = np.flatnonzero(prescribed_mask)
    free_index = np.full(prescribed_mask.shape[0], -1, dtype=np.int64)
    free_index[free] = np.arange(free.shape[0])

    local = free_index[element_dofs]
    rows = np.broadcast_to(local[:, :, None], (local.shape[0], 24, 24)).ravel()
    cols = np.broadcast_to(local[:, None, :], (local.shape[0], 24, 24)).ravel()
    entries = np.flatnonzero((rows >= 0) & (cols >= 0))
    n_free = free.shape[0]
    keys = rows[entries] * n_free + cols[entries]
    unique_keys, slots = np.unique(keys, return_inverse=True)
    indptr = np.zeros(n_free + 1, dtype=np.int64)
    np.cumsum(np.bincount(unique_keys // n_free, minlength=n_free), out=indptr[1:])

    B, det = quadrature_operators(size)
    K_lambda, K_mu = stiffness_parts(size)
    active = np.array([True, True, dims == 3])

    mesh = MeshTopology(
        grid_shape=grid_shape,
        dims=dims,
        element_size=size,
        node_counts=counts,
        coordinates=coordinates,
        element_dofs=element_dofs,
        free=free,
        prescribed=prescribed,
        B=B,
        det_jacobian=det,
        K_lambda=K_lambda,
        K_mu=K_mu,
        active=active,
        pattern_entries=entries,
        pattern_slots=slots.astype(np.int64),
        indptr=indptr,
        indices=(unique_keys % n_free).astype(np.int64),
    )
    logger.debug(
        f"Built mesh for {grid_shape}: {mesh.n_elements} elements, "
        f"{mesh.n_free} free of {mesh.n_dofs} DOFs, {unique_keys.shape[0]} nonzeros"
    )
    return mesh
