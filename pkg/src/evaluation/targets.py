"""
Dataset Moduli and Targets

Bulk moduli of a dataset, target selection between its 1st and 99th
percentiles, and the gap profile of the modulus distribution.
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from ..errors import CompositeDesignError, InputValidationError
from ..fem import homogenize
from ..fem.solver import SolverMethod
from ..parallel import parallel_map

logger = logging.getLogger(__name__)

# Fewer samples than this give unstable percentiles
MIN_STABLE_SAMPLES = 100
TARGET_PERCENTILES = (1.0, 99.0)


def _modulus(grid: np.ndarray, method: Optional[SolverMethod], relaxed: bool) -> float:
    try:
        return homogenize(grid, method=method, relaxed=relaxed).K
    except CompositeDesignError as e:
        logger.warning(f"FEM solve failed: {e}")
        return float("nan")


def compute_moduli(
    grids: np.ndarray,
    workers: Optional[int] = None,
    method: Optional[SolverMethod] = None,
    relaxed: bool = False,
) -> np.ndarray:
    """
    Bulk modulus of every grid of a stack.

    Failed solves are logged and reported as NaN.

    Args:
        grids: Stack of normalized grids (n, *shape, 3)
        workers: Worker processes
        method: Solver selection
        relaxed: Accept relaxed (non-catalog) grids

    Returns:
        Array of n moduli (GPa)
    """
    grids = np.asarray(grids, dtype=np.float64)
    logger.info(f"Computing bulk moduli of {len(grids)} grids")
    moduli = parallel_map(partial(_modulus, method=method, relaxed=relaxed), list(grids), workers)
    return np.asarray(moduli, dtype=np.float64)


def select_targets(K: np.ndarray, count: int = 5) -> np.ndarray:
    """
    Evenly spaced targets between the 1st and 99th percentile.

    Percentiles interpolate linearly between order statistics.

    Args:
        K: Dataset moduli (NaN entries are ignored)
        count: Number of targets, both ends included

    Returns:
        Array of ``count`` increasing targets
    """
    K = np.asarray(K, dtype=np.float64)
    K = K[np.isfinite(K)]
    if K.size == 0:
        raise InputValidationError("No finite moduli to select targets from")
    if count < 1:
        raise InputValidationError(f"Target count must be positive, got {count}")
    if K.size < MIN_STABLE_SAMPLES:
        logger.warning(f"Only {K.size} moduli; percentiles are unstable below {MIN_STABLE_SAMPLES}")
    low, high = np.percentile(K, TARGET_PERCENTILES, method="linear")
    return np.linspace(low, high, count)


@dataclass
class GapProfile:
    """Mean gap to the next larger modulus per histogram bin."""
    edges: np.ndarray
    counts: np.ndarray
    mean_gap: np.ndarray

    def to_dict(self) -> dict:
        return {
            "edges": self.edges.tolist(),
            "counts": self.counts.tolist(),
            "mean_gap": [None if np.isnan(g) else float(g) for g in self.mean_gap],
        }


def k_gap_profile(K: np.ndarray, bins: int = 20) -> GapProfile:
    """
    Histogram of moduli with the mean gap Delta K to the next larger sample.

    Bins without a sample that has a larger neighbor report NaN.

    Args:
        K: Moduli
        bins: Number of equal-width bins

    Returns:
        GapProfile
    """
    K = np.sort(np.asarray(K, dtype=np.float64)[np.isfinite(K)])
    if K.size < 2:
        raise InputValidationError("At least two moduli are needed for a gap profile")
    counts, edges = np.histogram(K, bins=bins)
    gaps = np.diff(K)
    which = np.clip(np.searchsorted(edges, K[:-1], side="right") - 1, 0, bins - 1)
    totals = np.bincount(which, weights=gaps, minlength=bins)
    members = np.bincount(which, minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_gap = np.where(members > 0, totals / np.maximum(members, 1), np.nan)
    return GapProfile(edges=edges, counts=counts, mean_gap=mean_gap)
