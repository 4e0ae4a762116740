"""
Denoiser Configuration

Architecture and training hyperparameters as validated pydantic models.
"""

import hashlib
import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DenoiserConfig(BaseModel):
    """Architecture of the velocity-predicting U-Net."""

    model_config = ConfigDict(frozen=True)

    dims: Literal[2, 3] = Field(default=2, description="Spatial dimension")
    in_channels: int = Field(default=3, gt=0, description="Material channels (E, nu, rho)")
    stem_channels: int = Field(default=8, gt=0, description="Width of the 1x1 stem")
    block_channels: tuple[int, int] = Field(default=(32, 64), description="Down-block widths")
    mid_channels: int = Field(default=128, gt=0, description="Bottleneck width")
    groups: int = Field(default=8, gt=0, description="Group normalization groups")
    fourier_features: int = Field(default=16, gt=0, description="Gaussian Fourier embedding size")
    fourier_scale: float = Field(default=0.02, gt=0, description="Std of the fixed Fourier frequencies")
    time_embed_dim: int = Field(default=32, gt=0, description="Timestep embedding width")
    attention: bool = Field(default=False, description="Self-attention between the mid-block units")
    attention_heads: int = Field(default=16, gt=0, description="Attention heads")

    @model_validator(mode="after")
    def _check_widths(self) -> "DenoiserConfig":
        low, high = self.block_channels
        widths = {
            "stem_channels": self.stem_channels,
            "block_channels[0]": low,
            "block_channels[1]": high,
            "mid_channels": self.mid_channels,
            "skip concatenation": high + high,
            "upper skip concatenation": high + low,
            "output concatenation": low + self.stem_channels,
        }
        for name, width in widths.items():
            if width <= 0 or width % self.groups:
                raise ValueError(f"{name}={width} is not divisible by groups={self.groups}")
        if self.fourier_features % 2:
            raise ValueError("fourier_features must be even (sin and cos halves)")
        if self.attention and self.mid_channels % self.attention_heads:
            raise ValueError(f"mid_channels={self.mid_channels} not divisible by {self.attention_heads} heads")
        return self

    @property
    def downsampling(self) -> int:
        """Total spatial reduction at the bottleneck."""
        return 2 ** len(self.block_channels)

    def fingerprint(self) -> str:
        """Stable hash of the architecture."""
        encoded = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode("utf-8")
        return hashlib.sha256(encoded).hexdigest()[:16]


class TrainConfig(BaseModel):
    """Optimizer, schedule and loop settings of denoiser training."""

    model_config = ConfigDict(frozen=True)

    steps: int = Field(default=100_000, ge=0, description="Optimizer steps")
    batch_size: int = Field(default=128, gt=0, description="Samples per step")
    peak_lr: float = Field(default=1e-3, gt=0, description="Learning rate after warmup")
    warmup: int = Field(default=5000, ge=0, description="Linear warmup steps")
    beta1: float = Field(default=0.9, gt=0, lt=1)
    beta2: float = Field(default=0.999, gt=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)
    weight_decay: float = Field(default=1e-2, ge=0)
    grad_clip: float = Field(default=1.0, gt=0, description="Global gradient norm cap")
    log_every: int = Field(default=100, gt=0, description="Progress logging interval")
