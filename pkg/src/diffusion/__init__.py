"""
Diffusion Core Module

Noise schedules, trailing timestep selection, forward diffusion,
v-parameterization conversions and the DDIM update.
"""

from .process import (
    convert,
    ddim_coefficients,
    ddim_step,
    q_sample,
    v_target,
)

from .schedule import Schedule, build_schedule, trailing_timesteps

__all__ = [
    # Schedule
    "Schedule",
    "build_schedule",
    "trailing_timesteps",
    # Process
    "convert",
    "ddim_coefficients",
    "ddim_step",
    "q_sample",
    "v_target",
]
