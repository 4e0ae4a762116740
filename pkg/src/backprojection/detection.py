"""
Particle Detection

Finds particle centers and radii in a two-material assignment by
skeletonizing each candidate foreground, reading the distance transform on
the skeleton and pruning skeleton points covered by a larger ball.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree
from skimage.morphology import skeletonize

from ..errors import InputValidationError

logger = logging.getLogger(__name__)

# Skeleton points closer than this to the background are noise (elements)
MIN_DISTANCE = 2.0
# Larger distances than this fraction of the side are not particles
MAX_DISTANCE_FRACTION = 0.45


@dataclass
class Hypothesis:
    """Detection under one choice of foreground label."""
    label: int
    centers: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    rejected: Optional[str] = None

    @property
    def radius_variance(self) -> float:
        return float(np.var(self.radii)) if len(self.radii) else float("inf")


@dataclass
class ParticleDetection:
    """Detected particles of a grid."""
    foreground_label: Optional[int]
    centers: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    r_p_hat: Optional[float]
    f_p_hat: float
    side: int
    rejected: bool = False
    reasons: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return int(len(self.radii))

    @property
    def unit_centers(self) -> np.ndarray:
        """Centers in the unit domain."""
        return (self.centers + 0.5) / self.side

    def to_dict(self) -> dict:
        return {
            "foreground_label": self.foreground_label,
            "centers": self.unit_centers.tolist(),
            "radii": (self.radii / self.side).tolist(),
            "r_p_hat": self.r_p_hat,
            "f_p_hat": self.f_p_hat,
            "rejected": self.rejected,
            "reasons": list(self.reasons),
        }


def aggregate_radius(radii: np.ndarray) -> float:
    """Single radius (elements) from the detected per-center radii."""
    return float(np.mean(radii))


def boundary_mask(shape: tuple[int, ...]) -> np.ndarray:
    """Elements touching the domain boundary."""
    mask = np.zeros(shape, dtype=bool)
    for axis in range(len(shape)):
        index = [slice(None)] * len(shape)
        index[axis] = 0
        mask[tuple(index)] = True
        index[axis] = -1
        mask[tuple(index)] = True
    return mask


def skeleton_points(foreground: np.ndarray) -> np.ndarray:
    """Coordinates of a topology-preserving skeleton, in scan order."""
    if foreground.ndim == 3:
        skeleton = skeletonize(foreground, method="lee")
    else:
        skeleton = skeletonize(foreground)
    return np.argwhere(skeleton > 0)


def prune_skeleton(points: np.ndarray, distances: np.ndarray) -> np.ndarray:
    """
    Remove skeleton points inside the ball of a larger one.

    Point j is removed by point i when ||i - j|| <= d_i and d_j <= d_i. The
    non-strict comparison breaks ties: of two points with equal distance
    inside each other's ball, the one earlier in scan order survives. Points
    are visited by decreasing distance, so the global maximum always survives.

    Args:
        points: Skeleton coordinates (n, dims) in scan order
        distances: Distance transform at each point

    Returns:
        Indices of the surviving points
    """
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    tree = cKDTree(points)
    order = np.argsort(-distances, kind="stable")
    removed = np.zeros(len(points), dtype=bool)
    kept = []
    for i in order:
        if removed[i]:
            continue
        kept.append(i)
        for j in tree.query_ball_point(points[i], distances[i]):
            if j != i and distances[j] <= distances[i]:
                removed[j] = True
    return np.sort(np.asarray(kept, dtype=np.int64))


def _hypothesis(foreground: np.ndarray, label: int, boundary: np.ndarray) -> Hypothesis:
    empty = np.zeros((0, foreground.ndim))
    on_boundary = foreground[boundary]
    if on_boundary.sum() * 2 > on_boundary.size:
        return Hypothesis(label, empty, np.zeros(0), rejected="foreground covers most of the boundary")
    if not foreground.any():
        return Hypothesis(label, empty, np.zeros(0), rejected="empty foreground")

    points = skeleton_points(foreground)
    distance_map = ndimage.distance_transform_edt(foreground)
    distances = distance_map[tuple(points.T)] if len(points) else np.zeros(0)

    keep = distances >= MIN_DISTANCE
    points, distances = points[keep], distances[keep]
    if len(points) == 0:
        return Hypothesis(label, empty, np.zeros(0), rejected="no skeleton point far enough from the background")
    side = foreground.shape[0]
    if distances.max() > MAX_DISTANCE_FRACTION * side:
        return Hypothesis(label, empty, np.zeros(0), rejected=f"distance {distances.max():.1f} too large for a particle")

    surviving = prune_skeleton(points, distances)
    return Hypothesis(label, points[surviving].astype(np.float64), distances[surviving])


def detect_particles(assignment: np.ndarray) -> ParticleDetection:
    """
    Detect particles in a two-label assignment.

    Both labels are tried as foreground; the hypothesis with the lower
    variance of detected radii wins.

    Args:
        assignment: Integer labels 0/1 of shape (*shape,), 2 or 3 axes

    Returns:
        ParticleDetection; ``rejected`` is set when both hypotheses fail
    """
    assignment = np.asarray(assignment)
    if assignment.ndim not in (2, 3):
        raise InputValidationError(f"Assignment must have 2 or 3 axes, got {assignment.shape}")
    side = assignment.shape[0]
    boundary = boundary_mask(assignment.shape)

    hypotheses = [_hypothesis(assignment == label, label, boundary) for label in (0, 1)]
    valid = [h for h in hypotheses if h.rejected is None]
    if not valid:
        reasons = [f"label {h.label}: {h.rejected}" for h in hypotheses]
        logger.debug(f"Particle detection failed: {'; '.join(reasons)}")
        return ParticleDetection(
            foreground_label=None,
            centers=np.zeros((0, assignment.ndim)),
            radii=np.zeros(0),
            r_p_hat=None,
            f_p_hat=0.0,
            side=side,
            rejected=True,
            reasons=reasons,
        )

    best = min(valid, key=lambda h: h.radius_variance)
    foreground = assignment == best.label
    return ParticleDetection(
        foreground_label=best.label,
        centers=best.centers,
        radii=best.radii,
        r_p_hat=aggregate_radius(best.radii) / side,
        f_p_hat=float(foreground.sum()) / foreground.size,
        side=side,
        reasons=[f"label {h.label}: {h.rejected}" for h in hypotheses if h.rejected],
    )
