"""
Materials Module

Material catalog ingestion/generation, normalization to [-1, 1]^3, chunk
indexing, chunk-balanced sampling and nearest-material lookup.
"""

from .catalog import (
    Catalog,
    ChunkIndex,
    MaterialRecord,
    chunk_index,
    generate_synthetic_catalog,
    load_catalog,
    nearest_material,
    nearest_materials,
    sample_material,
    save_catalog,
)

from .normalization import (
    CHANNEL_NAMES,
    LOWER_BOUNDS,
    NORMALIZED_SCALE,
    UPPER_BOUNDS,
    chunk_coordinates,
    clamp_to_bounds,
    denormalize,
    flat_chunk_id,
    normalize,
)

__all__ = [
    # Catalog
    "Catalog",
    "ChunkIndex",
    "MaterialRecord",
    "chunk_index",
    "generate_synthetic_catalog",
    "load_catalog",
    "nearest_material",
    "nearest_materials",
    "sample_material",
    "save_catalog",
    # Normalization
    "CHANNEL_NAMES",
    "LOWER_BOUNDS",
    "NORMALIZED_SCALE",
    "UPPER_BOUNDS",
    "chunk_coordinates",
    "clamp_to_bounds",
    "denormalize",
    "flat_chunk_id",
    "normalize",
]
