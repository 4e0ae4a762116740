"""
Variance Schedule

Linear beta schedule with optional zero-terminal-SNR rescaling, and the
"trailing" selection of sampling timesteps.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..config import get_settings
from ..errors import InputValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Schedule:
    """Immutable noise schedule indexed by t in [0, T-1]."""
    T: int
    betas: np.ndarray = field(repr=False)
    alpha_bar: np.ndarray = field(repr=False)
    timesteps: np.ndarray = field(repr=False)
    rescaled: bool = True

    @property
    def n_steps(self) -> int:
        return int(self.timesteps.shape[0])

    def with_timesteps(self, n: int) -> "Schedule":
        """Copy with ``n`` trailing sampling timesteps."""
        return replace(self, timesteps=trailing_timesteps(self.T, n))

    def alpha_bar_at(self, t) -> np.ndarray:
        return self.alpha_bar[np.asarray(t)]

    def alpha_bar_prev(self, i: int) -> float:
        """alpha_bar of the step after sampling index ``i`` (1 after the last)."""
        if i + 1 >= self.n_steps:
            return 1.0
        return float(self.alpha_bar[self.timesteps[i + 1]])

    def to_dict(self) -> dict:
        return {"T": self.T, "rescaled": self.rescaled, "n_steps": self.n_steps}


def build_schedule(
    T: Optional[int] = None,
    beta0: Optional[float] = None,
    betaT: Optional[float] = None,
    rescale: Optional[bool] = None,
    n_steps: Optional[int] = None,
) -> Schedule:
    """
    Build a linear beta schedule.

    With rescaling, s_t = sqrt(alpha_bar_t) is mapped affinely so that
    s_T = 0 while s_1 is unchanged, and betas are recomputed from it.

    Args:
        T: Training timesteps (settings default)
        beta0: First beta (settings default)
        betaT: Last beta (settings default)
        rescale: Zero-terminal-SNR rescaling (settings default)
        n_steps: Sampling steps (default T)

    Returns:
        Schedule

    Raises:
        InputValidationError: If not 0 < beta0 <= betaT < 1
    """
    settings = get_settings()
    T = settings.diffusion_steps if T is None else T
    beta0 = settings.beta_start if beta0 is None else beta0
    betaT = settings.beta_end if betaT is None else betaT
    rescale = settings.rescale_betas if rescale is None else rescale

    if T < 1:
        raise InputValidationError(f"T must be positive, got {T}")
    if not 0.0 < beta0 <= betaT < 1.0:
        raise InputValidationError(f"Invalid beta range [{beta0}, {betaT}]")

    betas = np.linspace(beta0, betaT, T, dtype=np.float64)
    alpha_bar = np.cumprod(1.0 - betas)

    if rescale and T > 1:
        root = np.sqrt(alpha_bar)
        first, last = root[0], root[-1]
        root = (root - last) * first / (first - last)
        root[-1] = 0.0
        alpha_bar = root ** 2
        alphas = alpha_bar / np.concatenate([[1.0], alpha_bar[:-1]])
        betas = 1.0 - alphas

    schedule = Schedule(
        T=T,
        betas=betas,
        alpha_bar=alpha_bar,
        timesteps=trailing_timesteps(T, n_steps or T),
        rescaled=bool(rescale),
    )
    return schedule


def trailing_timesteps(T: int, n: int) -> np.ndarray:
    """
    Trailing timesteps t_k = round(T - k T / N) - 1, k = 0..N-1.

    Rounding is half-up (exact integer arithmetic); results are clamped to
    [0, T-1] and deduplicated, strictly decreasing.

    Args:
        T: Training timesteps
        n: Sampling steps N

    Returns:
        Integer array starting at T - 1

    Raises:
        InputValidationError: If not 1 <= N <= T
    """
    if not 1 <= n <= T:
        raise InputValidationError(f"Sampling steps must lie in [1, {T}], got {n}")
    k = np.arange(n, dtype=np.int64)
    # round_half_up((T N - k T) / N) == floor((2 (T N - k T) + N) / (2 N))
    rounded = (2 * (T * n - k * T) + n) // (2 * n)
    steps = np.clip(rounded - 1, 0, T - 1)
    return np.unique(steps)[::-1].copy()
