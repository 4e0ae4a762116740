"""
Rasterization

Maps a design and a particle layout onto a regular element grid. Grids are
channel-last arrays of shape (*shape, 3) holding normalized material vectors.
"""

import numpy as np

from ..errors import InputValidationError
from .design import DesignParams
from .packing import ParticleLayout

GRID_SHAPES = {2: (64, 64), 3: (32, 32, 32)}


def grid_dims(grid: np.ndarray) -> int:
    """Spatial dimension of a channel-last grid."""
    dims = grid.ndim - 1
    if dims not in (2, 3) or grid.shape[-1] != 3:
        raise InputValidationError(f"Expected a (*shape, 3) grid with 2 or 3 spatial axes, got {grid.shape}")
    return dims


def element_centers(shape: tuple[int, ...]) -> np.ndarray:
    """Element center coordinates in the unit domain, shape (*shape, dims)."""
    axes = [(np.arange(n) + 0.5) / n for n in shape]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def particle_mask(layout: ParticleLayout, shape: tuple[int, ...]) -> np.ndarray:
    """
    Boolean mask of elements whose center lies inside any particle.

    Args:
        layout: Particle layout
        shape: Grid shape (2 or 3 axes)

    Returns:
        Boolean array of the given shape
    """
    if layout.count and layout.dims != len(shape):
        raise InputValidationError(f"{layout.dims}D layout cannot be rasterized onto shape {shape}")
    centers = element_centers(shape)
    mask = np.zeros(shape, dtype=bool)
    radius_sq = layout.radius ** 2
    for center in layout.centers:
        mask |= np.sum((centers - center) ** 2, axis=-1) <= radius_sq
    return mask


def compose_grid(mask: np.ndarray, matrix: np.ndarray, particle: np.ndarray) -> np.ndarray:
    """Two-material grid from a mask and two normalized material vectors."""
    return np.where(mask[..., None], np.asarray(particle), np.asarray(matrix)).astype(np.float64)


def rasterize(theta: DesignParams, layout: ParticleLayout, shape: tuple[int, ...]) -> np.ndarray:
    """
    Rasterize a design onto an element grid.

    Args:
        theta: Design parameters (materials in physical units)
        layout: Particle layout with radius theta.r_p
        shape: Grid shape, e.g. (64, 64) or (32, 32, 32)

    Returns:
        Grid of shape (*shape, 3) in normalized space
    """
    mask = particle_mask(layout, tuple(shape))
    return compose_grid(mask, theta.matrix_normalized, theta.particle_normalized)


def realized_volume_fraction(grid_or_mask: np.ndarray, particle: np.ndarray | None = None) -> float:
    """
    Fraction of particle elements.

    Args:
        grid_or_mask: Boolean mask, or a two-material grid
        particle: Normalized particle vector identifying particle elements
            in a grid; defaults to the material with fewer elements

    Returns:
        Particle element count divided by the total element count
    """
    array = np.asarray(grid_or_mask)
    if array.dtype == bool:
        return float(array.mean())

    grid_dims(array)
    flat = array.reshape(-1, 3)
    if particle is not None:
        return float(np.all(np.isclose(flat, particle), axis=1).mean())
    _, counts = np.unique(flat, axis=0, return_counts=True)
    if len(counts) == 1:
        return 0.0
    return float(np.sort(counts)[0] / flat.shape[0])
