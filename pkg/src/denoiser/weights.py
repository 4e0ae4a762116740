"""
Weight Persistence

Network parameters in the shared tensor container, with the architecture,
its fingerprint and a format version in the header.
"""

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import torch
from packaging import version
from pydantic import ValidationError

from ..artifacts.container import read_container, write_container
from ..errors import ArtifactError, IncompatibleWeightsError
from .config import DenoiserConfig
from .model import init_model
from .network import VelocityUNet

logger = logging.getLogger(__name__)

WEIGHTS_KIND = "weights"
FORMAT_VERSION = "1.0"


def _compatible(file_version: str) -> bool:
    """Same major version and not newer than this reader."""
    try:
        found = version.parse(file_version)
    except version.InvalidVersion:
        return False
    current = version.parse(FORMAT_VERSION)
    return found.major == current.major and found <= current


def save_weights(model: VelocityUNet, path: Path | str, metadata: Optional[dict] = None) -> Path:
    """
    Write network weights.

    Args:
        model: Network to save
        path: Destination file
        metadata: Extra JSON-serializable header entries (e.g. training summary)

    Returns:
        The path written
    """
    config: DenoiserConfig = model.config
    header = {
        "kind": WEIGHTS_KIND,
        "format_version": FORMAT_VERSION,
        "config": config.model_dump(mode="json"),
        "fingerprint": config.fingerprint(),
        "metadata": metadata or {},
    }
    tensors = {name: value.detach().cpu().numpy() for name, value in model.state_dict().items()}
    path = write_container(path, header, tensors)
    logger.info(f"Saved {len(tensors)} weight tensors ({config.fingerprint()}) to {path}")
    return path


def load_weights(
    path: Path | str,
    expected: Optional[DenoiserConfig] = None,
    dtype: torch.dtype = torch.float32,
) -> VelocityUNet:
    """
    Read network weights.

    Args:
        path: Weight file
        expected: Architecture the caller requires (fingerprint check)
        dtype: Parameter dtype of the returned network

    Returns:
        VelocityUNet in eval mode

    Raises:
        ArtifactError: Truncated or foreign file
        IncompatibleWeightsError: Format version or fingerprint mismatch
    """
    header, tensors = read_container(path)
    if header.get("kind") != WEIGHTS_KIND:
        raise ArtifactError(f"{path}: not a weights file")

    file_version = str(header.get("format_version", "0"))
    if not _compatible(file_version):
        raise IncompatibleWeightsError(f"{path}: format version {file_version} is not supported (reader {FORMAT_VERSION})")

    try:
        config = DenoiserConfig.model_validate(header["config"])
    except (KeyError, ValidationError) as e:
        raise ArtifactError(f"{path}: invalid network configuration ({e})") from e

    if config.fingerprint() != header.get("fingerprint"):
        raise ArtifactError(f"{path}: configuration does not match its fingerprint")
    if expected is not None and expected.fingerprint() != config.fingerprint():
        raise IncompatibleWeightsError(
            f"{path}: weights were trained for {config.dims}D fingerprint {config.fingerprint()}, "
            f"expected {expected.dims}D fingerprint {expected.fingerprint()}"
        )

    model = init_model(config, seed=0, dtype=torch.float32)
    state = model.state_dict()
    if set(state) != set(tensors):
        raise IncompatibleWeightsError(f"{path}: parameter names do not match the architecture")
    for name, array in tensors.items():
        if tuple(state[name].shape) != array.shape:
            raise IncompatibleWeightsError(f"{path}: tensor '{name}' has shape {array.shape}, expected {tuple(state[name].shape)}")
        if not np.all(np.isfinite(array)):
            raise ArtifactError(f"{path}: tensor '{name}' contains non-finite values")

    model.load_state_dict({name: torch.from_numpy(array) for name, array in tensors.items()})
    return model.to(dtype).eval()
