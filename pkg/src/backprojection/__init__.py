"""
Backprojection Module

Recovers discrete design parameters from generated grids: material mixture
fit, skeleton-based particle detection and nearest-material lookup.
"""

from .backproject import Backprojection, backproject, backproject_batch, save_backprojections

from .detection import (
    MAX_DISTANCE_FRACTION,
    MIN_DISTANCE,
    ParticleDetection,
    aggregate_radius,
    boundary_mask,
    detect_particles,
    prune_skeleton,
    skeleton_points,
)

from .mixture import SINGLE_MATERIAL_DISTANCE, MaterialFit, fit_material_gmm

__all__ = [
    # Mixture fit
    "SINGLE_MATERIAL_DISTANCE",
    "MaterialFit",
    "fit_material_gmm",
    # Detection
    "MAX_DISTANCE_FRACTION",
    "MIN_DISTANCE",
    "ParticleDetection",
    "aggregate_radius",
    "boundary_mask",
    "detect_particles",
    "prune_skeleton",
    "skeleton_points",
    # Backprojection
    "Backprojection",
    "backproject",
    "backproject_batch",
    "save_backprojections",
]
