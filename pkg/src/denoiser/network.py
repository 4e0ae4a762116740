"""
Velocity U-Net

Dimension-generic (2D/3D) residual U-Net with group normalization, SiLU,
Gaussian Fourier timestep embedding, average-pool downsampling and
nearest-neighbor upsampling with skip concatenation.
"""

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import DenoiserConfig


def _conv(dims: int):
    return nn.Conv2d if dims == 2 else nn.Conv3d


class GaussianFourierEmbedding(nn.Module):
    """Fixed random Fourier features of the raw timestep."""

    def __init__(self, features: int, scale: float):
        super().__init__()
        self.register_buffer("frequencies", torch.randn(features // 2) * scale)

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        angles = 2.0 * math.pi * t[:, None].to(self.frequencies.dtype) * self.frequencies[None, :]
        return torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)


class ResidualUnit(nn.Module):
    """GN -> SiLU -> conv -> +time -> GN -> SiLU -> conv, plus a 1x1 shortcut."""

    def __init__(self, dims: int, in_channels: int, out_channels: int, time_dim: int, groups: int):
        super().__init__()
        conv = _conv(dims)
        self.norm1 = nn.GroupNorm(groups, in_channels)
        self.conv1 = conv(in_channels, out_channels, kernel_size=3, padding=1)
        self.time_proj = nn.Linear(time_dim, out_channels)
        self.norm2 = nn.GroupNorm(groups, out_channels)
        self.conv2 = conv(out_channels, out_channels, kernel_size=3, padding=1)
        self.shortcut = conv(in_channels, out_channels, kernel_size=1)
        self._spatial = (None,) * dims

    def forward(self, x: torch.Tensor, embedding: torch.Tensor) -> torch.Tensor:
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.time_proj(embedding)[(...,) + self._spatial]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.shortcut(x)


def positional_encoding(shape: tuple[int, ...], channels: int, dtype: torch.dtype, device) -> torch.Tensor:
    """Sinusoidal encoding over every spatial axis, shape (prod(shape), channels)."""
    per_axis = 2 * math.ceil(channels / (2 * len(shape)))
    inv_freq = 1.0 / (10000 ** (torch.arange(0, per_axis, 2, dtype=dtype, device=device) / per_axis))
    axes = torch.meshgrid(*(torch.arange(n, dtype=dtype, device=device) for n in shape), indexing="ij")
    parts = []
    for axis in axes:
        angles = axis.reshape(-1, 1) * inv_freq[None, :]
        parts.append(torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1))
    return torch.cat(parts, dim=-1)[:, :channels]


class SpatialSelfAttention(nn.Module):
    """Multi-head self-attention over all grid positions with a residual."""

    def __init__(self, channels: int, heads: int, groups: int):
        super().__init__()
        self.norm = nn.GroupNorm(groups, channels)
        self.attention = nn.MultiheadAttention(channels, heads, batch_first=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        batch, channels, *spatial = x.shape
        tokens = self.norm(x).flatten(2).transpose(1, 2)
        tokens = tokens + positional_encoding(tuple(spatial), channels, x.dtype, x.device)[None]
        attended, _ = self.attention(tokens, tokens, tokens, need_weights=False)
        return x + attended.transpose(1, 2).reshape(batch, channels, *spatial)


class VelocityUNet(nn.Module):
    """U-Net predicting v from (x_t, t)."""

    def __init__(self, config: DenoiserConfig):
        super().__init__()
        self.config = config
        dims = config.dims
        conv = _conv(dims)
        low, high = config.block_channels
        mid = config.mid_channels
        time_dim = config.time_embed_dim
        groups = config.groups

        def unit(cin: int, cout: int) -> ResidualUnit:
            return ResidualUnit(dims, cin, cout, time_dim, groups)

        self.stem = conv(config.in_channels, config.stem_channels, kernel_size=1)
        self.time_embedding = GaussianFourierEmbedding(config.fourier_features, config.fourier_scale)
        self.time_mlp = nn.Sequential(
            nn.Linear(config.fourier_features, time_dim),
            nn.SiLU(),
            nn.Linear(time_dim, time_dim),
        )

        self.down = nn.ModuleList([
            nn.ModuleList([unit(config.stem_channels, low), unit(low, low)]),
            nn.ModuleList([unit(low, high), unit(high, high)]),
        ])
        self.mid = nn.ModuleList([unit(high, mid), unit(mid, mid), unit(mid, high)])
        if config.attention:
            self.mid_attention = nn.ModuleList([
                SpatialSelfAttention(mid, config.attention_heads, groups) for _ in range(2)
            ])
        else:
            self.mid_attention = None
        self.up = nn.ModuleList([
            nn.ModuleList([unit(high + high, high), unit(high + high, high)]),
            nn.ModuleList([unit(high + low, low), unit(low + low, low)]),
        ])
        self.out_unit = unit(low + config.stem_channels, config.stem_channels)
        self.out = conv(config.stem_channels, config.in_channels, kernel_size=1)

    def _pool(self, x: torch.Tensor) -> torch.Tensor:
        return F.avg_pool2d(x, 2) if self.config.dims == 2 else F.avg_pool3d(x, 2)

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        """
        Predict v.

        Args:
            x: Latents of shape (batch, 3, *spatial)
            t: Raw integer timesteps of shape (batch,)

        Returns:
            Velocity of the same shape as x
        """
        embedding = self.time_mlp(self.time_embedding(t))
        stem = self.stem(x)

        h = stem
        skips = []
        for first, second in self.down:
            h = second(first(h, embedding), embedding)
            skips.append(h)
            h = self._pool(h)

        for index, block in enumerate(self.mid):
            h = block(h, embedding)
            if self.mid_attention is not None and index < len(self.mid_attention):
                h = self.mid_attention[index](h)

        for (first, second), skip in zip(self.up, reversed(skips)):
            h = F.interpolate(h, scale_factor=2, mode="nearest")
            h = first(torch.cat([h, skip], dim=1), embedding)
            h = second(torch.cat([h, skip], dim=1), embedding)

        h = self.out_unit(torch.cat([h, stem], dim=1), embedding)
        return self.out(h)
