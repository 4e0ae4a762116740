"""
Artifacts Module

Binary containers and output path handling shared by every command.
"""

from .container import MAGIC, read_container, write_container
from .paths import BLOCKED_PATHS, is_path_blocked, require_file, resolve_output_dir, sanitize_filename

__all__ = [
    "BLOCKED_PATHS",
    "MAGIC",
    "is_path_blocked",
    "read_container",
    "require_file",
    "resolve_output_dir",
    "sanitize_filename",
    "write_container",
]
