"""
Design Evaluation

Estimates K_theta of a backprojected design by sampling fresh
microstructures with a stochastically rounded particle count.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from ..errors import CompositeDesignError, EvaluationError, InputValidationError
from ..fem import homogenize
from ..materials import chunk_coordinates, flat_chunk_id
from ..microstructure import (
    DesignParams,
    ParticleLayout,
    check_dims,
    pack_particles,
    particle_count,
    rasterize,
    stochastic_round,
)
from ..parallel import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_REPEATS = 10


@dataclass
class EvalResult:
    """K_theta of one design against a target."""
    theta_hat: DesignParams
    K_theta: float
    K_star: float
    K_values: list[float] = field(default_factory=list)
    repeats: int = 0
    chunk_ids: tuple[int, int] = (0, 0)
    label: Optional[object] = None
    reliable: bool = True
    errors: list[str] = field(default_factory=list)

    @property
    def eps(self) -> float:
        return abs(self.K_theta - self.K_star)

    @property
    def eps_r(self) -> float:
        return self.eps / self.K_star

    @property
    def K_std(self) -> float:
        return float(np.std(self.K_values)) if self.K_values else 0.0

    def with_target(self, K_star: float) -> "EvalResult":
        """Same estimate against another target."""
        return EvalResult(
            theta_hat=self.theta_hat,
            K_theta=self.K_theta,
            K_star=K_star,
            K_values=list(self.K_values),
            repeats=self.repeats,
            chunk_ids=self.chunk_ids,
            label=self.label,
            reliable=self.reliable,
            errors=list(self.errors),
        )

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "theta_hat": self.theta_hat.to_dict(),
            "K_theta": self.K_theta,
            "K_star": self.K_star,
            "K_std": self.K_std,
            "eps_r": self.eps_r,
            "eps": self.eps,
            "successful_repeats": len(self.K_values),
            "repeats": self.repeats,
            "chunk_ids": list(self.chunk_ids),
            "reliable": self.reliable,
        }


def design_chunk_ids(theta: DesignParams) -> tuple[int, int]:
    """Flat chunk ids of the matrix and particle materials."""
    chunks = chunk_coordinates(np.stack([theta.matrix_vector, theta.particle_vector]))
    return flat_chunk_id(tuple(chunks[0])), flat_chunk_id(tuple(chunks[1]))


def sample_microstructure(
    theta: DesignParams,
    shape: tuple[int, ...],
    rng: np.random.Generator,
) -> np.ndarray:
    """
    One grid realizing a design, with a stochastically rounded count.

    Raises:
        PackingInfeasibleError: If the particles cannot be placed
    """
    dims = check_dims(len(shape))
    if theta.f_p <= 0.0 or theta.r_p is None:
        layout = ParticleLayout(centers=np.zeros((0, dims)), radius=theta.r_p or 0.0)
    else:
        real, _ = particle_count(theta.f_p, theta.r_p, dims)
        layout = pack_particles(stochastic_round(real, rng), theta.r_p, dims, rng)
    return rasterize(theta, layout, shape)


def evaluate_design(
    theta_hat: DesignParams,
    K_star: float,
    n: int,
    rng: np.random.Generator,
    shape: tuple[int, ...],
    label: Optional[object] = None,
) -> EvalResult:
    """
    Mean bulk modulus of ``n`` fresh microstructures of a design.

    Failed repeats (infeasible packing, degenerate materials) are skipped
    and logged; fewer than n/2 successes mark the result unreliable.

    Args:
        theta_hat: Design to evaluate
        K_star: Target bulk modulus
        n: Number of repeats
        rng: Random generator
        shape: Grid shape of the repeats
        label: Identifier carried into reports

    Returns:
        EvalResult

    Raises:
        EvaluationError: If every repeat failed
    """
    if n < 1:
        raise InputValidationError(f"Repeat count must be at least 1, got {n}")
    if K_star <= 0:
        raise InputValidationError(f"Target bulk modulus must be positive, got {K_star}")

    values: list[float] = []
    errors: list[str] = []
    for repeat in range(n):
        try:
            grid = sample_microstructure(theta_hat, shape, rng)
            values.append(homogenize(grid).K)
        except CompositeDesignError as e:
            logger.warning(f"Evaluation repeat {repeat} of {label} skipped: {e}")
            errors.append(str(e))

    if not values:
        raise EvaluationError(f"All {n} evaluation repeats of {label} failed: {errors[0]}")

    return EvalResult(
        theta_hat=theta_hat,
        K_theta=float(np.mean(values)),
        K_star=K_star,
        K_values=values,
        repeats=n,
        chunk_ids=design_chunk_ids(theta_hat),
        label=label,
        reliable=2 * len(values) >= n,
        errors=errors,
    )


def _evaluate_indexed(
    item: tuple[int, DesignParams],
    K_star: float,
    n: int,
    seed: int,
    shape: tuple[int, ...],
    labels: Optional[list],
) -> Optional[EvalResult]:
    index, theta = item
    label = labels[index] if labels is not None else index
    try:
        return evaluate_design(theta, K_star, n, np.random.default_rng([seed, index]), shape, label=label)
    except EvaluationError as e:
        logger.warning(str(e))
        return None


def evaluate_designs(
    thetas: list[DesignParams],
    K_star: float,
    n: int,
    seed: int,
    shape: tuple[int, ...],
    labels: Optional[list] = None,
    workers: Optional[int] = None,
) -> list[Optional[EvalResult]]:
    """
    Evaluate many designs in parallel (design k draws from [seed, k]).

    Returns:
        One EvalResult per design, None where every repeat failed
    """
    run = partial(_evaluate_indexed, K_star=K_star, n=n, seed=seed, shape=tuple(shape), labels=labels)
    logger.info(f"Evaluating {len(thetas)} designs with {n} repeats each")
    return parallel_map(run, list(enumerate(thetas)), workers)
