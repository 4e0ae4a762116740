"""
Particle Packing

Non-overlapping placement of equal circles/spheres in the unit square/cube,
none intersecting the domain boundary, by iterative penetration resolving.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..config import get_settings
from ..errors import InputValidationError, PackingInfeasibleError

logger = logging.getLogger(__name__)

# Over-relaxation applied to every pairwise separating delta
SEPARATION_FACTOR = 1.5


@dataclass(frozen=True)
class ParticleLayout:
    """Particle centers in the unit domain with a common radius."""
    centers: np.ndarray = field(repr=False)
    radius: float

    @property
    def count(self) -> int:
        return int(self.centers.shape[0])

    @property
    def dims(self) -> int:
        return int(self.centers.shape[1])

    def violations(self) -> list[str]:
        """Human-readable list of violated layout invariants (empty if valid)."""
        problems = []
        if self.count == 0:
            return problems
        r = self.radius
        if np.any(self.centers < r) or np.any(self.centers > 1.0 - r):
            problems.append("particle intersects the domain boundary")
        if self.count > 1:
            diff = self.centers[:, None, :] - self.centers[None, :, :]
            distance = np.linalg.norm(diff, axis=-1)
            upper = np.triu_indices(self.count, k=1)
            closest = float(distance[upper].min())
            if closest < 2.0 * r:
                problems.append(f"particles overlap (closest pair {closest:.6f} < {2 * r:.6f})")
        return problems

    def to_dict(self) -> dict:
        return {"radius": self.radius, "centers": self.centers.tolist()}

    @classmethod
    def from_dict(cls, data: dict, dims: int) -> "ParticleLayout":
        centers = np.asarray(data["centers"], dtype=np.float64).reshape(-1, dims)
        return cls(centers=centers, radius=float(data["radius"]))


def _resolve_step(
    centers: np.ndarray,
    radius: float,
    jitter: float,
    rng: np.random.Generator,
) -> Optional[np.ndarray]:
    """One simultaneous update; returns None when nothing penetrates."""
    n = centers.shape[0]
    diff = centers[:, None, :] - centers[None, :, :]
    distance = np.linalg.norm(diff, axis=-1)
    penetration = 2.0 * radius - distance
    np.fill_diagonal(penetration, 0.0)
    overlapping = penetration > 0.0
    if not overlapping.any():
        return None

    # Coincident centers get a random separating direction
    safe = np.where(distance > 0.0, distance, 1.0)
    direction = diff / safe[..., None]
    coincident = (distance == 0.0) & ~np.eye(n, dtype=bool)
    if coincident.any():
        random_dirs = rng.normal(size=direction.shape)
        random_dirs /= np.linalg.norm(random_dirs, axis=-1, keepdims=True)
        random_dirs = (random_dirs - np.swapaxes(random_dirs, 0, 1)) / 2.0
        direction = np.where(coincident[..., None], random_dirs, direction)

    # Each sphere of a pair moves half the penetration, scaled up
    weight = np.where(overlapping, 0.5 * SEPARATION_FACTOR * penetration, 0.0)
    delta = np.einsum("ij,ijk->ik", weight, direction)

    involved = overlapping.any(axis=1)
    delta[involved] += rng.uniform(-jitter * radius, jitter * radius, size=(int(involved.sum()), centers.shape[1]))
    return np.clip(centers + delta, radius, 1.0 - radius)


def pack_particles(
    n: int,
    r: float,
    dims: int,
    rng: np.random.Generator,
    max_restarts: Optional[int] = None,
    max_updates: Optional[int] = None,
    jitter: Optional[float] = None,
) -> ParticleLayout:
    """
    Place ``n`` non-overlapping particles of radius ``r``.

    Initial centers are uniform in [r, 1 - r]^dims. While any pair
    penetrates, every center accumulates 1.5x the separating delta of each
    of its overlaps (plus a small jitter) and all deltas are applied at once.
    After ``max_updates`` unsuccessful updates the placement restarts.

    Args:
        n: Number of particles
        r: Common radius (unit-domain fraction)
        dims: 2 or 3
        rng: Random generator
        max_restarts: Fresh placements before giving up (settings default)
        max_updates: Updates per placement (settings default)
        jitter: Jitter half-width relative to r (settings default)

    Returns:
        A valid ParticleLayout

    Raises:
        PackingInfeasibleError: If no valid layout was found
    """
    settings = get_settings()
    max_restarts = settings.packing_max_restarts if max_restarts is None else max_restarts
    max_updates = settings.packing_max_updates if max_updates is None else max_updates
    if max_restarts < 1 or max_updates < 0:
        raise InputValidationError(
            f"Packing needs at least one restart and non-negative updates, got {max_restarts} and {max_updates}"
        )
    jitter = settings.packing_jitter if jitter is None else jitter

    if n < 0:
        raise InputValidationError(f"Particle count must be non-negative, got {n}")
    if n == 0:
        return ParticleLayout(centers=np.zeros((0, dims)), radius=r)
    if r <= 0 or 2.0 * r >= 1.0:
        raise PackingInfeasibleError(f"Radius {r} does not fit into the unit domain")

    for restart in range(max_restarts):
        centers = rng.uniform(r, 1.0 - r, size=(n, dims))
        for _ in range(max_updates):
            updated = _resolve_step(centers, r, jitter, rng)
            if updated is None:
                layout = ParticleLayout(centers=centers, radius=r)
                if restart:
                    logger.debug(f"Packed {n} particles after {restart} restarts")
                return layout
            centers = updated
        if _resolve_step(centers, r, jitter, rng) is None:
            return ParticleLayout(centers=centers, radius=r)
        logger.debug(f"Packing restart {restart + 1}/{max_restarts} (n={n}, r={r:.4f})")

    raise PackingInfeasibleError(
        f"Could not place {n} particles of radius {r:.4f} in {dims}D after {max_restarts} restarts"
    )
