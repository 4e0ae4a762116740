"""
Forward Process and DDIM Update

Noising, v-parameterization conversions and the DDIM step. Functions accept
numpy arrays or torch tensors; schedule coefficients are broadcast over a
leading batch axis when ``t`` is an array.
"""

from typing import Any, Optional

import numpy as np

from .schedule import Schedule


def _coefficient(values: np.ndarray, like: Any):
    """Broadcast per-sample coefficients against ``like`` (numpy or torch)."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 0:
        return float(values)
    shaped = values.reshape(values.shape + (1,) * (like.ndim - values.ndim))
    if hasattr(like, "new_tensor"):
        return like.new_tensor(shaped)
    return shaped


def _timestep_index(t: Any) -> np.ndarray:
    if hasattr(t, "detach"):
        t = t.detach().cpu().numpy()
    return np.asarray(t, dtype=np.int64)


def q_sample(x0, t, eps, schedule: Schedule):
    """
    Diffuse a clean sample: sqrt(ab_t) x0 + sqrt(1 - ab_t) eps.

    Args:
        x0: Clean samples
        t: Timestep (scalar or per-sample array)
        eps: Standard normal noise like x0
        schedule: Noise schedule

    Returns:
        x_t
    """
    alpha_bar = schedule.alpha_bar[_timestep_index(t)]
    return _coefficient(np.sqrt(alpha_bar), x0) * x0 + _coefficient(np.sqrt(1.0 - alpha_bar), x0) * eps


def v_target(x0, eps, t, schedule: Schedule):
    """Velocity target sqrt(ab_t) eps - sqrt(1 - ab_t) x0."""
    alpha_bar = schedule.alpha_bar[_timestep_index(t)]
    return _coefficient(np.sqrt(alpha_bar), x0) * eps - _coefficient(np.sqrt(1.0 - alpha_bar), x0) * x0


def convert(v, x_t, t, schedule: Schedule):
    """
    Recover (eps, x0_hat) from a velocity prediction.

    Args:
        v: Predicted velocity
        x_t: Noisy sample
        t: Timestep
        schedule: Noise schedule

    Returns:
        Tuple of (eps, x0_hat)
    """
    alpha_bar = schedule.alpha_bar[_timestep_index(t)]
    signal = _coefficient(np.sqrt(alpha_bar), x_t)
    noise = _coefficient(np.sqrt(1.0 - alpha_bar), x_t)
    x0_hat = signal * x_t - noise * v
    eps = noise * x_t + signal * v
    return eps, x0_hat


def ddim_coefficients(i: int, eta: float, schedule: Schedule) -> tuple[float, float, float]:
    """
    Coefficients (c_x, c_0, sigma) of the DDIM update at sampling index ``i``.

    alpha_bar of the step after the last is 1, which collapses the update
    to x0_hat.
    """
    alpha_bar = float(schedule.alpha_bar[schedule.timesteps[i]])
    alpha_bar_prev = schedule.alpha_bar_prev(i)
    alpha_tilde = alpha_bar / alpha_bar_prev
    beta_tilde = 1.0 - alpha_tilde
    denominator = 1.0 - alpha_bar
    c_x = np.sqrt(alpha_tilde) * (1.0 - alpha_bar_prev) / denominator
    c_0 = np.sqrt(alpha_bar_prev) * beta_tilde / denominator
    sigma = eta * np.sqrt(max((1.0 - alpha_bar_prev) / denominator * beta_tilde, 0.0))
    return float(c_x), float(c_0), float(sigma)


def ddim_step(x_i, x0_hat, i: int, eta: float, z: Optional[Any], schedule: Schedule):
    """
    One DDIM update from sampling index ``i`` to ``i + 1``.

    Args:
        x_i: Current latent
        x0_hat: Predicted clean sample
        i: Sampling index into schedule.timesteps
        eta: Noise scale (0 deterministic, 1 ancestral variance)
        z: Standard normal draw like x_i (unused when sigma is 0)
        schedule: Noise schedule

    Returns:
        x_{i-1}
    """
    c_x, c_0, sigma = ddim_coefficients(i, eta, schedule)
    x_prev = c_x * x_i + c_0 * x0_hat
    if sigma > 0.0 and z is not None:
        x_prev = x_prev + sigma * z
    return x_prev
