"""
Loss-Guided Sampling

DDIM sampling where every step evaluates the objective at the predicted
clean sample. Guided runs pull the FEM adjoint gradient back to the latent
and subtract it after the DDIM update.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from ..config import get_settings
from ..diffusion import Schedule, convert, ddim_step
from ..denoiser import Denoiser
from ..errors import BatchFailedError, CompositeDesignError, GuidanceStepError, InputValidationError
from ..fem import homogenize
from ..materials import Catalog, nearest_materials
from ..parallel import parallel_map
from ..sensitivity import GridGradient, adjoint_gradient, objective
from .config import GuidanceConfig

logger = logging.getLogger(__name__)

# Normalized-unit lift keeping E strictly positive at the lower bound
LOWER_BOUND_LIFT = 1e-6


@dataclass
class SampleRecord:
    """Result of one sampling chain."""
    seed: int
    chain: int
    x0: Optional[np.ndarray] = field(default=None, repr=False)
    losses: list[float] = field(default_factory=list)
    K_s: Optional[float] = None
    J: Optional[float] = None
    success: bool = True
    error: Optional[str] = None
    failed_step: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "chain": self.chain,
            "losses": list(self.losses),
            "K_s": self.K_s,
            "J": self.J,
            "success": self.success,
            "error": self.error,
            "failed_step": self.failed_step,
        }


def clip_prediction(x0_hat: np.ndarray) -> np.ndarray:
    """Clip to [-1, 1] and lift the E channel off its lower bound."""
    clipped = np.clip(x0_hat, -1.0, 1.0)
    clipped[..., 0] = np.maximum(clipped[..., 0], -1.0 + LOWER_BOUND_LIFT)
    return clipped


def loss_gradient_at_xhat(
    x0_hat: np.ndarray,
    config: GuidanceConfig,
    step: int = 0,
) -> GridGradient:
    """
    Channel-scaled objective gradient at a predicted clean sample.

    Args:
        x0_hat: Predicted clean grid (clipped here if needed)
        config: Guidance settings (objective and channel scales)
        step: Sampling index, reported on failure

    Returns:
        GridGradient in normalized units, scaled per channel

    Raises:
        GuidanceStepError: If the FEM solve or the adjoint fails
    """
    grid = clip_prediction(np.asarray(x0_hat, dtype=np.float64))
    try:
        gradient = adjoint_gradient(grid, config.objective, normalized=True, relaxed=True)
    except CompositeDesignError as e:
        raise GuidanceStepError(step, str(e)) from e
    gradient.values = gradient.values * config.channel_scales
    return gradient


def loss_at_xhat(x0_hat: np.ndarray, config: GuidanceConfig, step: int = 0) -> float:
    """J at a predicted clean sample without its gradient (NaN if the solve fails)."""
    try:
        K = homogenize(x0_hat, relaxed=True).K
    except CompositeDesignError as e:
        logger.debug(f"Loss at step {step} unavailable: {e}")
        return float("nan")
    return objective(config.objective, K, x0_hat)


def pull_back(
    denoiser: Denoiser,
    x_t: np.ndarray,
    t: int,
    gradient: np.ndarray,
    schedule: Schedule,
    mode: str,
) -> np.ndarray:
    """
    (d x0_hat / d x_t)^T applied to a gradient at x0_hat.

    With x0_hat = sqrt(ab) x_t - sqrt(1 - ab) v(x_t), the full product is
    sqrt(ab) g - sqrt(1 - ab) vjp_v(g). The direct mode keeps only the
    explicit term 1 / sqrt(ab), with ab floored.
    """
    alpha_bar = float(schedule.alpha_bar[int(t)])
    if mode == "direct":
        floor = get_settings().guidance_min_alpha_bar
        return gradient / np.sqrt(max(alpha_bar, floor))
    return np.sqrt(alpha_bar) * gradient - np.sqrt(1.0 - alpha_bar) * denoiser.vjp(x_t, t, gradient)


def guided_sample(
    denoiser: Denoiser,
    schedule: Schedule,
    config: GuidanceConfig,
    rng: np.random.Generator,
    shape: tuple[int, ...],
    catalog: Optional[Catalog] = None,
    seed: int = 0,
    chain: int = 0,
) -> SampleRecord:
    """
    Draw one sample with loss guidance.

    Args:
        denoiser: Velocity predictor
        schedule: Noise schedule (re-spaced to config.N sampling steps)
        config: Guidance settings
        rng: Stream for the initial latent and the DDIM noise
        shape: Spatial grid shape
        catalog: Required when config.project_materials is set
        seed: Recorded batch seed
        chain: Recorded chain index

    Returns:
        SampleRecord with the clipped final grid

    Raises:
        GuidanceStepError: On FEM failure or a non-finite latent
    """
    if config.project_materials and catalog is None:
        raise InputValidationError("Material projection requires a catalog")
    if schedule.n_steps != config.N:
        schedule = schedule.with_timesteps(config.N)

    record = SampleRecord(seed=seed, chain=chain)
    x = rng.standard_normal((*shape, 3))

    for i, t in enumerate(schedule.timesteps):
        t = int(t)
        v = denoiser.predict_v(x, t)
        _, x0_hat = convert(v, x, t, schedule)
        if not np.all(np.isfinite(x0_hat)):
            raise GuidanceStepError(i, "prediction is not finite")
        x0_hat = clip_prediction(x0_hat)
        if config.project_materials:
            x0_hat, _ = nearest_materials(catalog, x0_hat)

        g_i = None
        if config.guided:
            gradient = loss_gradient_at_xhat(x0_hat, config, step=i)
            record.losses.append(gradient.J)
            g_i = pull_back(denoiser, x, t, gradient.values, schedule, config.mode)
        else:
            # Read only; the trajectory matches plain DDIM
            record.losses.append(loss_at_xhat(x0_hat, config, step=i))

        z = rng.standard_normal(x.shape) if config.eta > 0.0 else None
        x = ddim_step(x, x0_hat, i, config.eta, z, schedule)
        if g_i is not None:
            x = x - config.rho_D * g_i

        if not np.all(np.isfinite(x)):
            raise GuidanceStepError(i, f"latent became non-finite (loss trace {record.losses[-3:]})")

    record.x0 = np.clip(x, -1.0, 1.0)
    try:
        record.K_s = homogenize(record.x0, relaxed=True).K
    except CompositeDesignError as e:
        raise GuidanceStepError(schedule.n_steps, f"final FEM solve failed: {e}") from e
    record.J = objective(config.objective, record.K_s, record.x0)
    return record


def _run_chain(
    chain: int,
    denoiser: Denoiser,
    schedule: Schedule,
    config: GuidanceConfig,
    shape: tuple[int, ...],
    catalog: Optional[Catalog],
    seed: int,
) -> SampleRecord:
    rng = np.random.default_rng([seed, chain])
    try:
        return guided_sample(denoiser, schedule, config, rng, shape, catalog, seed=seed, chain=chain)
    except CompositeDesignError as e:
        logger.warning(f"Chain {chain} failed: {e}")
        return SampleRecord(
            seed=seed,
            chain=chain,
            success=False,
            error=str(e),
            failed_step=getattr(e, "step", None),
        )


def run_batch(
    denoiser: Denoiser,
    schedule: Schedule,
    config: GuidanceConfig,
    n_samples: int,
    seed: int,
    shape: tuple[int, ...],
    catalog: Optional[Catalog] = None,
    workers: Optional[int] = None,
) -> list[SampleRecord]:
    """
    Run independent guided chains.

    Chain k draws from numpy.random.default_rng([seed, k]), so the batch is
    reproducible regardless of the worker count.

    Args:
        denoiser: Velocity predictor (shared read-only)
        schedule: Noise schedule
        config: Guidance settings
        n_samples: Number of chains
        seed: Batch seed
        shape: Spatial grid shape
        catalog: Required for material projection
        workers: Worker processes

    Returns:
        One SampleRecord per chain, failures included

    Raises:
        BatchFailedError: If every chain failed
    """
    if n_samples < 1:
        raise InputValidationError(f"n_samples must be at least 1, got {n_samples}")

    logger.info(f"Sampling {n_samples} chains (rho_D={config.rho_D}, N={config.N}, mode={config.mode})")
    run = partial(
        _run_chain,
        denoiser=denoiser,
        schedule=schedule,
        config=config,
        shape=tuple(shape),
        catalog=catalog,
        seed=seed,
    )
    records = parallel_map(run, range(n_samples), workers)

    failed = sum(not record.success for record in records)
    if failed == n_samples:
        raise BatchFailedError(f"All {n_samples} chains failed; first error: {records[0].error}")
    if failed:
        logger.warning(f"{failed}/{n_samples} chains failed")
    return records
