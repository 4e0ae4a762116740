"""
Material Normalization and Chunking

Affine maps between physical material vectors (E [GPa], nu, rho [g/cm^3])
and the normalized cube [-1, 1]^3 the diffusion model works in, plus the
10x10x10 chunk partition of that cube.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike

logger = logging.getLogger(__name__)

# Fixed selection bounds per channel: E, nu, rho
LOWER_BOUNDS = np.array([0.0, 0.0, 0.0])
UPPER_BOUNDS = np.array([500.0, 0.5, 10.0])
CHANNEL_NAMES = ("E", "nu", "rho")

CHUNKS_PER_AXIS = 10
# Snap tolerance so values sitting on a segment boundary land in the same
# chunk before and after a normalize/denormalize roundtrip
_CHUNK_SNAP = 1e-9

# d(physical)/d(normalized) per channel
NORMALIZED_SCALE = (UPPER_BOUNDS - LOWER_BOUNDS) / 2.0


def clamp_to_bounds(values: ArrayLike) -> tuple[np.ndarray, bool]:
    """
    Clamp physical material vectors to the normalization bounds.

    Args:
        values: Array of shape (..., 3)

    Returns:
        Tuple of (clamped array, whether any value was clamped)
    """
    array = np.asarray(values, dtype=np.float64)
    clamped = np.clip(array, LOWER_BOUNDS, UPPER_BOUNDS)
    return clamped, bool(np.any(clamped != array))


def normalize(values: ArrayLike) -> np.ndarray:
    """
    Map physical (E, nu, rho) vectors to [-1, 1]^3.

    Out-of-bound inputs are clamped and a warning is logged.

    Args:
        values: Array of shape (..., 3)

    Returns:
        Normalized array of the same shape
    """
    clamped, was_clamped = clamp_to_bounds(values)
    if was_clamped:
        logger.warning("Material values outside normalization bounds were clamped")
    return 2.0 * (clamped - LOWER_BOUNDS) / (UPPER_BOUNDS - LOWER_BOUNDS) - 1.0


def denormalize(values: ArrayLike) -> np.ndarray:
    """
    Map normalized vectors back to physical (E, nu, rho).

    Values outside [-1, 1] are clamped first, with a warning.

    Args:
        values: Array of shape (..., 3)

    Returns:
        Physical array of the same shape
    """
    array = np.asarray(values, dtype=np.float64)
    clipped = np.clip(array, -1.0, 1.0)
    if np.any(clipped != array):
        logger.warning("Normalized material values outside [-1, 1] were clamped")
    return LOWER_BOUNDS + (clipped + 1.0) * NORMALIZED_SCALE


def chunk_coordinates(values: ArrayLike) -> np.ndarray:
    """
    Chunk index triples for physical material vectors.

    Args:
        values: Array of shape (..., 3)

    Returns:
        Integer array of shape (..., 3) with entries in 0..9
    """
    array = np.asarray(values, dtype=np.float64)
    scaled = CHUNKS_PER_AXIS * (array - LOWER_BOUNDS) / (UPPER_BOUNDS - LOWER_BOUNDS)
    index = np.floor(scaled + _CHUNK_SNAP).astype(np.int64)
    return np.clip(index, 0, CHUNKS_PER_AXIS - 1)


def flat_chunk_id(chunk: tuple[int, int, int]) -> int:
    """Flatten an (i, j, k) chunk triple to 0..999."""
    i, j, k = chunk
    return (i * CHUNKS_PER_AXIS + j) * CHUNKS_PER_AXIS + k
