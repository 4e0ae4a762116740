"""
Denoiser Interface

A denoiser maps a channel-last latent grid and a timestep to a velocity
prediction and provides the vector-Jacobian product of that map. The
network-backed implementation wraps the U-Net; the oracle implementation
returns the exact velocity of a known clean sample.
"""

import logging
from typing import Protocol, runtime_checkable

import numpy as np
import torch

from ..diffusion import Schedule
from ..errors import DenoiserInputError
from .config import DenoiserConfig
from .network import VelocityUNet

logger = logging.getLogger(__name__)


@runtime_checkable
class Denoiser(Protocol):
    """Velocity predictor used by the samplers."""

    def predict_v(self, x_t: np.ndarray, t: int) -> np.ndarray:
        ...

    def vjp(self, x_t: np.ndarray, t: int, cotangent: np.ndarray) -> np.ndarray:
        ...


def init_model(config: DenoiserConfig, seed: int, dtype: torch.dtype = torch.float32) -> VelocityUNet:
    """
    Deterministically initialize a network.

    Args:
        config: Architecture
        seed: Initialization seed
        dtype: Parameter dtype

    Returns:
        VelocityUNet in eval mode
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = VelocityUNet(config)
    return model.to(dtype).eval()


class NetworkDenoiser:
    """Denoiser backed by a VelocityUNet (read-only during sampling)."""

    def __init__(self, model: VelocityUNet):
        self.model = model.eval()
        for parameter in self.model.parameters():
            parameter.requires_grad_(False)

    @property
    def config(self) -> DenoiserConfig:
        return self.model.config

    @property
    def dtype(self) -> torch.dtype:
        return next(self.model.parameters()).dtype

    def _to_tensor(self, x_t: np.ndarray) -> torch.Tensor:
        array = np.asarray(x_t)
        dims = self.config.dims
        if array.ndim != dims + 1 or array.shape[-1] != self.config.in_channels:
            raise DenoiserInputError(f"Expected a {dims}D grid with {self.config.in_channels} channels, got {array.shape}")
        if any(n % self.config.downsampling for n in array.shape[:-1]):
            raise DenoiserInputError(f"Grid sides must be divisible by {self.config.downsampling}, got {array.shape[:-1]}")
        if not np.all(np.isfinite(array)):
            raise DenoiserInputError("Latent contains non-finite values")
        channels_first = np.moveaxis(array, -1, 0)[None]
        return torch.as_tensor(np.ascontiguousarray(channels_first), dtype=self.dtype)

    def _timestep(self, t: int) -> torch.Tensor:
        return torch.full((1,), int(t), dtype=torch.long)

    @staticmethod
    def _to_array(tensor: torch.Tensor) -> np.ndarray:
        return np.moveaxis(tensor[0].detach().cpu().numpy().astype(np.float64), 0, -1)

    def predict_v(self, x_t: np.ndarray, t: int) -> np.ndarray:
        """Velocity prediction for one channel-last grid."""
        with torch.no_grad():
            v = self.model(self._to_tensor(x_t), self._timestep(t))
        return self._to_array(v)

    def vjp(self, x_t: np.ndarray, t: int, cotangent: np.ndarray) -> np.ndarray:
        """
        Reverse-mode product cotangent^T dv/dx_t.

        Args:
            x_t: Latent grid
            t: Timestep
            cotangent: Array shaped like the output

        Returns:
            Gradient with respect to x_t, channel-last
        """
        cotangent = np.asarray(cotangent)
        if cotangent.shape != np.shape(x_t):
            raise DenoiserInputError(f"Cotangent shape {cotangent.shape} does not match {np.shape(x_t)}")
        x = self._to_tensor(x_t).requires_grad_(True)
        with torch.enable_grad():
            v = self.model(x, self._timestep(t))
            (grad,) = torch.autograd.grad(v, x, grad_outputs=self._to_tensor(cotangent))
        return self._to_array(grad)


class OracleDenoiser:
    """Returns the exact velocity of a fixed clean sample x0."""

    def __init__(self, x0: np.ndarray, schedule: Schedule):
        self.x0 = np.asarray(x0, dtype=np.float64)
        self.schedule = schedule

    def _rates(self, t: int) -> tuple[float, float]:
        alpha_bar = float(self.schedule.alpha_bar[int(t)])
        return np.sqrt(alpha_bar), np.sqrt(1.0 - alpha_bar)

    def predict_v(self, x_t: np.ndarray, t: int) -> np.ndarray:
        signal, noise = self._rates(t)
        return (signal * np.asarray(x_t, dtype=np.float64) - self.x0) / noise

    def vjp(self, x_t: np.ndarray, t: int, cotangent: np.ndarray) -> np.ndarray:
        signal, noise = self._rates(t)
        return signal / noise * np.asarray(cotangent, dtype=np.float64)


def forward(denoiser: Denoiser, x_t: np.ndarray, t: int) -> np.ndarray:
    """v_hat = denoiser(x_t, t)."""
    return denoiser.predict_v(x_t, t)


def vjp(denoiser: Denoiser, x_t: np.ndarray, t: int, cotangent: np.ndarray) -> np.ndarray:
    """Gradient of <cotangent, denoiser(x_t, t)> with respect to x_t."""
    return denoiser.vjp(x_t, t, cotangent)
