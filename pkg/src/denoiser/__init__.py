"""
Denoiser Module

Velocity-predicting U-Net, the denoiser interface used by the samplers,
training and weight persistence.
"""

from .config import DenoiserConfig, TrainConfig

from .model import (
    Denoiser,
    NetworkDenoiser,
    OracleDenoiser,
    forward,
    init_model,
    vjp,
)

from .network import VelocityUNet

from .training import (
    TrainResult,
    save_loss_history,
    train,
    validation_v_mse,
    warmup_cosine,
    zero_predictor_mse,
)

from .weights import FORMAT_VERSION, load_weights, save_weights

__all__ = [
    # Configuration
    "DenoiserConfig",
    "TrainConfig",
    # Network and interface
    "VelocityUNet",
    "Denoiser",
    "NetworkDenoiser",
    "OracleDenoiser",
    "init_model",
    "forward",
    "vjp",
    # Training
    "TrainResult",
    "train",
    "save_loss_history",
    "validation_v_mse",
    "warmup_cosine",
    "zero_predictor_mse",
    # Persistence
    "FORMAT_VERSION",
    "load_weights",
    "save_weights",
]
