"""
Output Path Validation

Validates artifact destinations before anything is written: system locations
are refused, directories are created on demand and artifact file names are
reduced to one safe path component.
"""

import logging
import os
import re
from pathlib import Path
from typing import Optional

from ..errors import InputValidationError

logger = logging.getLogger(__name__)

# Characters never allowed in artifact file names
_UNSAFE_CHARACTERS = re.compile(r"[<>:\"/\\|?*\x00-\x1f]")
MAX_FILENAME_LENGTH = 255

# System paths that artifacts must never be written to
BLOCKED_PATHS = [
    "/etc/",
    "/proc/",
    "/sys/",
    "/dev/",
    "/boot/",
    "/var/log/",
    "/private/etc/",    # macOS
    "/private/var/",    # macOS
    "/System/",         # macOS
    "C:\\Windows\\",    # Windows
    "C:\\System32\\",   # Windows
]


def is_path_blocked(path: str) -> tuple[bool, Optional[str]]:
    """
    Check if a path is in a blocked system location.

    Args:
        path: The path to check

    Returns:
        Tuple of (is_blocked, reason)
    """
    if not path:
        return True, "Empty path"

    try:
        normalized = os.path.normpath(os.path.expanduser(path))
        absolute = os.path.abspath(normalized)
    except (ValueError, OSError) as e:
        return True, f"Invalid path: {e}"

    for blocked in BLOCKED_PATHS:
        if (absolute + os.sep).startswith(blocked) or normalized.startswith(blocked):
            return True, f"Writing to system path blocked: {blocked}"

    return False, None


def resolve_output_dir(path: str) -> Path:
    """
    Validate an output directory and create it if needed.

    Args:
        path: Requested output directory

    Returns:
        Absolute path of the existing directory

    Raises:
        InputValidationError: If the path is blocked or is an existing file
    """
    is_blocked, reason = is_path_blocked(path)
    if is_blocked:
        raise InputValidationError(f"Invalid output directory '{path}': {reason}")

    directory = Path(os.path.expanduser(path)).resolve()
    if directory.exists() and not directory.is_dir():
        raise InputValidationError(f"Output path exists and is not a directory: {directory}")

    directory.mkdir(parents=True, exist_ok=True)
    logger.debug(f"Output directory: {directory}")
    return directory


def sanitize_filename(filename: str) -> str:
    """
    Reduce an artifact name to a single safe path component.

    Directory parts are dropped, unsafe characters become underscores and
    overlong names are shortened with their extension kept.

    Args:
        filename: Requested file name

    Returns:
        A non-empty file name
    """
    if not filename:
        return "unnamed"

    basename = _UNSAFE_CHARACTERS.sub("_", os.path.basename(filename.replace("\\", "/")))
    basename = basename.strip(". \t")
    if not basename:
        return "unnamed"

    if len(basename) > MAX_FILENAME_LENGTH:
        stem, extension = os.path.splitext(basename)
        basename = stem[: MAX_FILENAME_LENGTH - len(extension)] + extension
    return basename


def require_file(path: str) -> Path:
    """Return ``path`` as a Path, raising if it is not an existing file."""
    resolved = Path(os.path.expanduser(path))
    if not resolved.is_file():
        raise InputValidationError(f"File not found: {path}")
    return resolved

