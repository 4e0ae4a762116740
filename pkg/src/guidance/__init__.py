"""
Guidance Module

Loss-guided DDIM sampling driven by FEM adjoint gradients.
"""

from .config import GuidanceConfig, GuidanceMode

from .sampler import (
    LOWER_BOUND_LIFT,
    SampleRecord,
    clip_prediction,
    guided_sample,
    loss_at_xhat,
    loss_gradient_at_xhat,
    pull_back,
    run_batch,
)

from .storage import load_samples, save_samples

__all__ = [
    # Configuration
    "GuidanceConfig",
    "GuidanceMode",
    # Sampling
    "LOWER_BOUND_LIFT",
    "SampleRecord",
    "clip_prediction",
    "guided_sample",
    "loss_at_xhat",
    "loss_gradient_at_xhat",
    "pull_back",
    "run_batch",
    # Storage
    "load_samples",
    "save_samples",
]
