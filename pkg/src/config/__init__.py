"""
Configuration Module

Environment settings and per-run configuration documents.
"""

from .run_config import RUN_CONFIG_NAME, RunConfig, load_parameters
from .settings import Settings, get_settings

__all__ = [
    "RUN_CONFIG_NAME",
    "RunConfig",
    "Settings",
    "get_settings",
    "load_parameters",
]
