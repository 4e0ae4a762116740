"""
Sample Storage

Sampling records as a container: per-chain JSON records in the header and
the successful final grids stacked in one tensor.
"""

import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..artifacts.container import read_container, write_container
from ..errors import ArtifactError
from .sampler import SampleRecord

logger = logging.getLogger(__name__)

SAMPLES_KIND = "samples"


def save_samples(
    records: list[SampleRecord],
    path: Path | str,
    metadata: Optional[dict[str, Any]] = None,
) -> Path:
    """
    Write sampling records.

    Args:
        records: Chain results (failed chains carry no grid)
        path: Destination file
        metadata: Extra header entries (guidance config, target)

    Returns:
        The path written
    """
    entries = []
    grids = []
    for record in records:
        entry = record.to_dict()
        entry["grid_index"] = None
        if record.success and record.x0 is not None:
            entry["grid_index"] = len(grids)
            grids.append(record.x0)
        entries.append(entry)

    header = {"kind": SAMPLES_KIND, "records": entries, "metadata": metadata or {}}
    tensors = {"grids": np.stack(grids)} if grids else {}
    path = write_container(path, header, tensors)
    logger.info(f"Wrote {len(grids)}/{len(records)} samples to {path}")
    return path


def load_samples(path: Path | str) -> tuple[list[SampleRecord], dict[str, Any]]:
    """
    Read sampling records.

    Returns:
        Tuple of (records with float64 grids, metadata)

    Raises:
        ArtifactError: If the file is not a consistent samples file
    """
    header, tensors = read_container(path)
    if header.get("kind") != SAMPLES_KIND:
        raise ArtifactError(f"{path}: not a samples file")

    grids = tensors.get("grids")
    records = []
    for entry in header.get("records", []):
        index = entry.get("grid_index")
        x0 = None
        if index is not None:
            if grids is None or index >= grids.shape[0]:
                raise ArtifactError(f"{path}: record {entry.get('chain')} points past the grid tensor")
            x0 = grids[index].astype(np.float64)
        records.append(SampleRecord(
            seed=int(entry["seed"]),
            chain=int(entry["chain"]),
            x0=x0,
            losses=[float(value) for value in entry.get("losses", [])],
            K_s=entry.get("K_s"),
            J=entry.get("J"),
            success=bool(entry.get("success", x0 is not None)),
            error=entry.get("error"),
            failed_step=entry.get("failed_step"),
        ))
    return records, header.get("metadata", {})
