"""
Training Dataset

Generation, storage and validation of rasterized two-material samples. Each
sample draws its randomness from its own ``[seed, index]`` stream so the
result does not depend on the worker count.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np

from ..artifacts.container import read_container, write_container
from ..config import get_settings
from ..errors import ArtifactError, PackingInfeasibleError
from ..materials import Catalog
from ..parallel import parallel_map
from .design import DesignParams, check_dims, particle_count, sample_design_params
from .packing import ParticleLayout, pack_particles
from .rasterize import grid_dims, particle_mask, rasterize

logger = logging.getLogger(__name__)

DATASET_KIND = "dataset"


@dataclass(frozen=True)
class DatasetSample:
    """Manifest entry of one generated sample."""
    index: int
    theta: DesignParams
    layout: ParticleLayout
    count_real: float
    attempts: int = 1

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "theta": self.theta.to_dict(),
            "layout": self.layout.to_dict(),
            "count_real": self.count_real,
            "attempts": self.attempts,
        }


@dataclass
class Dataset:
    """Grids plus their manifest."""
    dims: int
    shape: tuple[int, ...]
    seed: int
    samples: list[DatasetSample]
    grids: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.samples)


def generate_sample(
    index: int,
    catalog: Catalog,
    dims: int,
    shape: tuple[int, ...],
    seed: int,
    max_resamples: Optional[int] = None,
) -> tuple[DatasetSample, np.ndarray]:
    """
    Generate one sample from the ``[seed, index]`` random stream.

    The design is resampled when packing is infeasible for the drawn
    (f_p, r_p).

    Args:
        index: Sample index
        catalog: Material catalog
        dims: 2 or 3
        shape: Grid shape
        seed: Dataset seed
        max_resamples: Design attempts before giving up (settings default)

    Returns:
        Tuple of (manifest entry, grid)
    """
    max_resamples = max_resamples or get_settings().dataset_max_resamples
    rng = np.random.default_rng([seed, index])
    for attempt in range(1, max_resamples + 1):
        theta = sample_design_params(catalog, dims, rng)
        real, count = particle_count(theta.f_p, theta.r_p, dims)
        try:
            layout = pack_particles(count, theta.r_p, dims, rng)
        except PackingInfeasibleError as e:
            logger.warning(f"Sample {index}: resampling design after attempt {attempt} ({e})")
            continue
        sample = DatasetSample(index=index, theta=theta, layout=layout, count_real=real, attempts=attempt)
        return sample, rasterize(theta, layout, shape)

    raise PackingInfeasibleError(f"Sample {index}: no feasible design after {max_resamples} attempts")


def generate_dataset(
    catalog: Catalog,
    n_samples: int,
    dims: int,
    shape: tuple[int, ...],
    seed: int,
    path: Optional[Path | str] = None,
    workers: Optional[int] = None,
) -> Dataset:
    """
    Generate ``n_samples`` independent grids and optionally write them.

    Args:
        catalog: Material catalog
        n_samples: Number of samples
        dims: 2 or 3
        shape: Grid shape
        seed: Dataset seed
        path: Output container (skipped when None)
        workers: Worker processes (settings default)

    Returns:
        The generated Dataset
    """
    check_dims(dims)
    shape = tuple(int(n) for n in shape)
    job = partial(generate_sample, catalog=catalog, dims=dims, shape=shape, seed=seed)
    logger.info(f"Generating {n_samples} {dims}D samples on {'x'.join(map(str, shape))} grids")
    results = parallel_map(job, range(n_samples), workers=workers)

    samples = [sample for sample, _ in results]
    grids = np.stack([grid for _, grid in results]) if results else np.zeros((0, *shape, 3))
    dataset = Dataset(dims=dims, shape=shape, seed=seed, samples=samples, grids=grids)

    resampled = sum(sample.attempts > 1 for sample in samples)
    if resampled:
        logger.warning(f"{resampled} samples needed design resampling")
    if path is not None:
        save_dataset(dataset, path)
    return dataset


# =============================================================================
# Storage
# =============================================================================

def save_dataset(dataset: Dataset, path: Path | str) -> Path:
    """Write a dataset container (manifest header + float32 grids)."""
    header = {
        "kind": DATASET_KIND,
        "dims": dataset.dims,
        "shape": list(dataset.shape),
        "count": len(dataset),
        "seed": dataset.seed,
        "samples": [sample.to_dict() for sample in dataset.samples],
    }
    path = write_container(path, header, {"grids": dataset.grids})
    logger.info(f"Wrote {len(dataset)} samples to {path}")
    return path


def load_dataset(path: Path | str) -> Dataset:
    """
    Read a dataset container.

    Raises:
        ArtifactError: If the file is not a consistent dataset
    """
    header, tensors = read_container(path)
    if header.get("kind") != DATASET_KIND or "grids" not in tensors:
        raise ArtifactError(f"{path}: not a dataset file")

    dims = int(header["dims"])
    shape = tuple(header["shape"])
    grids = tensors["grids"].astype(np.float64)
    if grids.shape != (int(header["count"]), *shape, 3) or len(header["samples"]) != grids.shape[0]:
        raise ArtifactError(f"{path}: manifest does not match grid tensor {grids.shape}")

    samples = [
        DatasetSample(
            index=int(entry["index"]),
            theta=DesignParams.from_dict(entry["theta"]),
            layout=ParticleLayout.from_dict(entry["layout"], dims),
            count_real=float(entry["count_real"]),
            attempts=int(entry.get("attempts", 1)),
        )
        for entry in header["samples"]
    ]
    return Dataset(dims=dims, shape=shape, seed=int(header["seed"]), samples=samples, grids=grids)


def validate_dataset(dataset: Dataset) -> list[str]:
    """
    Re-check every layout invariant and the two-material property.

    Args:
        dataset: Loaded or generated dataset

    Returns:
        List of problems, empty when the dataset is valid
    """
    problems = []
    for sample, grid in zip(dataset.samples, dataset.grids):
        prefix = f"sample {sample.index}"
        problems.extend(f"{prefix}: {problem}" for problem in sample.layout.violations())
        if grid_dims(grid) != dataset.dims:
            problems.append(f"{prefix}: grid has the wrong dimension")
            continue
        if np.any(np.abs(grid) > 1.0):
            problems.append(f"{prefix}: channel values outside [-1, 1]")

        distinct = np.unique(grid.reshape(-1, 3), axis=0)
        if len(distinct) > 2:
            problems.append(f"{prefix}: {len(distinct)} distinct materials")
            continue

        matrix = sample.theta.matrix_normalized.astype(np.float32)
        particle = sample.theta.particle_normalized.astype(np.float32)
        if not np.array_equal(matrix, particle):
            expected = particle_mask(sample.layout, dataset.shape)
            actual = np.all(grid.astype(np.float32) == particle, axis=-1)
            if not np.array_equal(expected, actual):
                problems.append(f"{prefix}: particle elements do not match the layout")
    return problems
