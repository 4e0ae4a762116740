"""
Microstructure Module

Design parameter sampling, particle packing, rasterization onto element
grids and training-dataset generation.
"""

from .dataset import (
    Dataset,
    DatasetSample,
    generate_dataset,
    generate_sample,
    load_dataset,
    save_dataset,
    validate_dataset,
)

from .design import (
    DESIGN_RANGES,
    DesignParams,
    check_dims,
    particle_count,
    particle_volume,
    sample_design_params,
    stochastic_round,
)

from .packing import ParticleLayout, pack_particles

from .rasterize import (
    GRID_SHAPES,
    compose_grid,
    element_centers,
    grid_dims,
    particle_mask,
    rasterize,
    realized_volume_fraction,
)

__all__ = [
    # Design parameters
    "DESIGN_RANGES",
    "DesignParams",
    "check_dims",
    "particle_count",
    "particle_volume",
    "sample_design_params",
    "stochastic_round",
    # Packing
    "ParticleLayout",
    "pack_particles",
    # Rasterization
    "GRID_SHAPES",
    "compose_grid",
    "element_centers",
    "grid_dims",
    "particle_mask",
    "rasterize",
    "realized_volume_fraction",
    # Dataset
    "Dataset",
    "DatasetSample",
    "generate_dataset",
    "generate_sample",
    "load_dataset",
    "save_dataset",
    "validate_dataset",
]
