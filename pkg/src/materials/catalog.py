"""
Material Catalog

The discrete set of available base materials: CSV ingestion, synthetic
generation with chunk structure, chunk-balanced sampling and nearest-material
lookup in normalized space.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from scipy.spatial import cKDTree

from ..errors import (
    CatalogValidationError,
    EmptyCatalogError,
    InputValidationError,
    MalformedFileError,
)
from .normalization import (
    CHUNKS_PER_AXIS,
    LOWER_BOUNDS,
    UPPER_BOUNDS,
    chunk_coordinates,
    normalize,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ["id", "E", "nu", "rho"]
DEFAULT_MAX_RECORDS = 500
# Number of nonempty chunks targeted by the synthetic generator
SYNTHETIC_NONEMPTY_CHUNKS = 168
# Relative tie tolerance of the nearest-material lookup
_TIE_TOLERANCE = 1e-12

ChunkIndex = tuple[int, int, int]


class MaterialRecord(BaseModel):
    """One base material."""

    model_config = ConfigDict(frozen=True)

    id: int
    E: float = Field(gt=0, le=500, description="Young's modulus (GPa)")
    nu: float = Field(gt=0, lt=0.5, description="Poisson ratio")
    rho: float = Field(gt=0, lt=10, description="Density (g/cm^3)")

    def vector(self) -> np.ndarray:
        """Physical (E, nu, rho) vector."""
        return np.array([self.E, self.nu, self.rho])


def chunk_index(material: MaterialRecord) -> ChunkIndex:
    """
    Chunk of a material in the 10x10x10 partition of property space.

    Args:
        material: A valid record

    Returns:
        (i, j, k) with each entry in 0..9
    """
    i, j, k = chunk_coordinates(material.vector())
    return int(i), int(j), int(k)


class Catalog:
    """Immutable collection of materials, ordered by id."""

    def __init__(
        self,
        records: Iterable[MaterialRecord],
        max_records: Optional[int] = DEFAULT_MAX_RECORDS,
    ):
        ordered = tuple(sorted(records, key=lambda record: record.id))
        if not ordered:
            raise EmptyCatalogError("Catalog contains no materials")

        ids = [record.id for record in ordered]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise CatalogValidationError(duplicates, "duplicate ids")

        if max_records is not None and len(ordered) > max_records:
            raise InputValidationError(
                f"Catalog has {len(ordered)} materials, limit is {max_records}"
            )

        self._records = ordered
        self._properties = np.array([record.vector() for record in ordered])
        self._properties.setflags(write=False)
        self._normalized = normalize(self._properties)
        self._normalized.setflags(write=False)
        self._tree = cKDTree(self._normalized)

        chunks: dict[ChunkIndex, list[int]] = {}
        for index, coords in enumerate(chunk_coordinates(self._properties)):
            chunks.setdefault(tuple(int(c) for c in coords), []).append(index)
        self._chunks = {key: tuple(value) for key, value in sorted(chunks.items())}
        self._chunk_keys = tuple(self._chunks)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def __getitem__(self, index: int) -> MaterialRecord:
        return self._records[index]

    @property
    def records(self) -> tuple[MaterialRecord, ...]:
        return self._records

    @property
    def properties(self) -> np.ndarray:
        """Physical (E, nu, rho) per record, shape (n, 3)."""
        return self._properties

    @property
    def normalized(self) -> np.ndarray:
        """Normalized vectors per record, shape (n, 3)."""
        return self._normalized

    @property
    def nonempty_chunks(self) -> tuple[ChunkIndex, ...]:
        return self._chunk_keys

    def chunk_members(self, chunk: ChunkIndex) -> tuple[int, ...]:
        """Record positions inside a chunk (empty tuple if none)."""
        return self._chunks.get(chunk, ())

    def nearest(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Nearest record positions for normalized points.

        Ties within a relative tolerance go to the lowest id.

        Args:
            points: Array of shape (..., 3) in normalized space

        Returns:
            Tuple of (positions, distances), each of shape points.shape[:-1]
        """
        points = np.asarray(points, dtype=np.float64)
        flat = points.reshape(-1, 3)
        if len(self._records) == 1:
            distances = np.linalg.norm(flat - self._normalized[0], axis=1)
            positions = np.zeros(len(flat), dtype=np.int64)
        else:
            distances_k, positions_k = self._tree.query(flat, k=2)
            positions = positions_k[:, 0].astype(np.int64)
            distances = distances_k[:, 0]
            tied = distances_k[:, 1] - distances_k[:, 0] <= _TIE_TOLERANCE * np.maximum(
                1.0, distances_k[:, 0]
            )
            positions = np.where(tied, np.minimum(positions_k[:, 0], positions_k[:, 1]), positions)
        return positions.reshape(points.shape[:-1]), distances.reshape(points.shape[:-1])


# =============================================================================
# Catalog I/O
# =============================================================================

def load_catalog(path: Path | str, max_records: Optional[int] = DEFAULT_MAX_RECORDS) -> Catalog:
    """
    Load a catalog from an ``id,E,nu,rho`` CSV file.

    Args:
        path: CSV file with header id,E,nu,rho
        max_records: Record limit (None disables it)

    Returns:
        Validated Catalog

    Raises:
        MalformedFileError: Missing/wrong header or unparsable row
        CatalogValidationError: Rows outside the admissible property range
        EmptyCatalogError: No data rows
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as e:
        raise MalformedFileError(str(path), None, f"cannot read file ({e})") from e

    rows = [(number, row) for number, row in enumerate(rows, start=1) if any(c.strip() for c in row)]
    if not rows:
        raise EmptyCatalogError(f"{path}: empty catalog file")

    header_line, header = rows[0]
    if [cell.strip() for cell in header] != CSV_HEADER:
        raise MalformedFileError(str(path), header_line, f"expected header {','.join(CSV_HEADER)}")

    records = []
    offending = []
    for line, row in rows[1:]:
        if len(row) != len(CSV_HEADER):
            raise MalformedFileError(str(path), line, f"expected 4 fields, got {len(row)}")
        try:
            material_id = int(row[0])
            E, nu, rho = (float(cell) for cell in row[1:])
        except ValueError as e:
            raise MalformedFileError(str(path), line, str(e)) from e
        try:
            records.append(MaterialRecord(id=material_id, E=E, nu=nu, rho=rho))
        except ValidationError:
            offending.append(material_id)

    if offending:
        raise CatalogValidationError(offending)
    if not records:
        raise EmptyCatalogError(f"{path}: catalog has a header but no materials")

    catalog = Catalog(records, max_records=max_records)
    logger.info(f"Loaded {len(catalog)} materials in {len(catalog.nonempty_chunks)} chunks from {path}")
    return catalog


def save_catalog(catalog: Catalog, path: Path | str) -> Path:
    """Write a catalog as ``id,E,nu,rho`` CSV."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in catalog:
            writer.writerow([record.id, repr(record.E), repr(record.nu), repr(record.rho)])
    return path


# =============================================================================
# Synthetic generation
# =============================================================================

def _chunk_weights() -> np.ndarray:
    """Selection weights over the 1000 chunks, skewed toward low E."""
    e_index = np.repeat(np.arange(CHUNKS_PER_AXIS), CHUNKS_PER_AXIS ** 2)
    weights = np.exp(-e_index / 2.5)
    return weights / weights.sum()


def _capped_counts(available: np.ndarray, total: int, rng: np.random.Generator) -> np.ndarray:
    """Cap per-chunk counts so they sum to exactly ``total``."""
    if available.sum() < total:
        available = available * int(np.ceil(total / available.sum()))

    cap = 1
    while cap < available.max() and np.minimum(available, cap + 1).sum() <= total:
        cap += 1
    counts = np.minimum(available, cap)

    remainder = total - int(counts.sum())
    if remainder > 0:
        eligible = np.flatnonzero(available > cap)
        counts[rng.choice(eligible, size=remainder, replace=False)] += 1
    return counts


def generate_synthetic_catalog(
    seed: int,
    n: int = DEFAULT_MAX_RECORDS,
    nonempty_chunks: int = SYNTHETIC_NONEMPTY_CHUNKS,
) -> Catalog:
    """
    Generate a catalog with database-like chunk structure.

    Selects up to ``nonempty_chunks`` distinct chunks (skewed toward low E),
    draws a heavy-tailed "available" count per chunk, caps the per-chunk
    count so the total is exactly ``n`` and samples materials uniformly
    inside each chunk.

    Args:
        seed: Random seed
        n: Number of materials (>= 2)
        nonempty_chunks: Target number of nonempty chunks

    Returns:
        Deterministic Catalog for the given seed
    """
    if n < 2:
        raise InputValidationError(f"Need at least 2 materials, got n={n}")

    rng = np.random.default_rng(seed)
    n_chunks = min(nonempty_chunks, n)
    chosen = np.sort(rng.choice(CHUNKS_PER_AXIS ** 3, size=n_chunks, replace=False, p=_chunk_weights()))
    available = 1 + np.floor(rng.pareto(1.2, size=n_chunks) * 6).astype(np.int64)
    counts = _capped_counts(available, n, rng)

    width = (UPPER_BOUNDS - LOWER_BOUNDS) / CHUNKS_PER_AXIS
    margin = 1e-6 * width
    records = []
    for flat, count in zip(chosen, counts):
        coords = np.array(np.unravel_index(flat, (CHUNKS_PER_AXIS,) * 3))
        low = LOWER_BOUNDS + coords * width + margin
        high = LOWER_BOUNDS + (coords + 1) * width - margin
        for E, nu, rho in rng.uniform(low, high, size=(int(count), 3)):
            records.append(MaterialRecord(id=len(records) + 1, E=E, nu=nu, rho=rho))

    catalog = Catalog(records, max_records=None)
    logger.info(f"Generated {len(catalog)} synthetic materials in {len(catalog.nonempty_chunks)} chunks")
    return catalog


# =============================================================================
# Sampling and lookup
# =============================================================================

def sample_material(catalog: Catalog, rng: np.random.Generator) -> MaterialRecord:
    """
    Draw a material: uniform over nonempty chunks, then uniform within.

    Args:
        catalog: Nonempty catalog
        rng: Random generator

    Returns:
        The drawn record
    """
    chunks = catalog.nonempty_chunks
    if not chunks:
        raise EmptyCatalogError("Cannot sample from an empty catalog")
    members = catalog.chunk_members(chunks[int(rng.integers(len(chunks)))])
    return catalog[members[int(rng.integers(len(members)))]]


def nearest_material(catalog: Catalog, point: np.ndarray) -> tuple[MaterialRecord, float]:
    """
    Nearest catalog material to a normalized point.

    Args:
        catalog: Nonempty catalog
        point: Normalized (E, nu, rho) vector

    Returns:
        Tuple of (record, Euclidean distance in normalized space)
    """
    positions, distances = catalog.nearest(np.asarray(point, dtype=np.float64).reshape(1, 3))
    return catalog[int(positions[0])], float(distances[0])


def nearest_materials(catalog: Catalog, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Vectorized nearest lookup returning normalized catalog vectors.

    Args:
        catalog: Nonempty catalog
        points: Array of shape (..., 3) in normalized space

    Returns:
        Tuple of (nearest normalized vectors (..., 3), distances (...))
    """
    positions, distances = catalog.nearest(points)
    return catalog.normalized[positions], distances
