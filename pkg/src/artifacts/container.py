"""
Binary Tensor Container

Single on-disk format for datasets, network weights and generated samples:

    magic "CGDF" | u64 little-endian header length | UTF-8 JSON header | blobs

The header holds caller metadata plus a ``tensors`` manifest (name, shape,
offset, nbytes). Blobs are little-endian float32 in C order, so a grid of
shape (H, W, 3) is row-major with the material channel varying fastest.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import ArtifactError

logger = logging.getLogger(__name__)

MAGIC = b"CGDF"
BLOB_DTYPE = np.dtype("<f4")
_LENGTH = struct.Struct("<Q")


def write_container(
    path: Path | str,
    header: Mapping[str, Any],
    tensors: Mapping[str, np.ndarray],
) -> Path:
    """
    Write metadata and float32 tensors to a container file.

    Args:
        path: Destination file
        header: JSON-serializable metadata (must not contain "tensors")
        tensors: Named arrays, written in insertion order

    Returns:
        The path written
    """
    if "tensors" in header:
        raise ValueError("'tensors' is a reserved header key")

    manifest = []
    blobs = []
    offset = 0
    for name, array in tensors.items():
        blob = np.ascontiguousarray(array, dtype=BLOB_DTYPE).tobytes()
        manifest.append({
            "name": name,
            "shape": list(np.shape(array)),
            "offset": offset,
            "nbytes": len(blob),
        })
        blobs.append(blob)
        offset += len(blob)

    full_header = dict(header)
    full_header["tensors"] = manifest
    encoded = json.dumps(full_header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    path = Path(path)
    try:
        with open(path, "wb") as handle:
            handle.write(MAGIC)
            handle.write(_LENGTH.pack(len(encoded)))
            handle.write(encoded)
            for blob in blobs:
                handle.write(blob)
    except OSError as e:
        raise ArtifactError(f"Cannot write {path}: {e}") from e

    logger.debug(f"Wrote {path} ({len(manifest)} tensors, {offset} bytes)")
    return path


def read_container(path: Path | str) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    """
    Read a container file.

    Args:
        path: File to read

    Returns:
        Tuple of (header without the manifest, name -> float32 array)

    Raises:
        ArtifactError: If the file is missing, truncated or corrupt
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ArtifactError(f"Cannot read {path}: {e}") from e

    prefix = len(MAGIC) + _LENGTH.size
    if len(raw) < prefix or raw[:len(MAGIC)] != MAGIC:
        raise ArtifactError(f"{path}: not a tensor container")

    (header_length,) = _LENGTH.unpack_from(raw, len(MAGIC))
    if len(raw) < prefix + header_length:
        raise ArtifactError(f"{path}: truncated header")

    try:
        header = json.loads(raw[prefix:prefix + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ArtifactError(f"{path}: corrupt header ({e})") from e

    body = memoryview(raw)[prefix + header_length:]
    tensors: dict[str, np.ndarray] = {}
    for entry in header.pop("tensors", []):
        start, nbytes = entry["offset"], entry["nbytes"]
        shape = tuple(entry["shape"])
        expected = int(np.prod(shape, dtype=np.int64)) * BLOB_DTYPE.itemsize
        if nbytes != expected or start + nbytes > len(body):
            raise ArtifactError(f"{path}: truncated tensor '{entry['name']}'")
        array = np.frombuffer(body[start:start + nbytes], dtype=BLOB_DTYPE)
        tensors[entry["name"]] = array.reshape(shape).copy()

    return header, tensors
