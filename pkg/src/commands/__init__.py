"""
Commands Module

CLI subcommands. Importing this package registers every command.
"""

from . import analysis, data, sample, train  # noqa: F401
from .registry import (
    COMMAND_REGISTRY,
    Command,
    CommandContext,
    add_command,
    command,
    get_all_commands,
    get_command,
)

__all__ = [
    "COMMAND_REGISTRY",
    "Command",
    "CommandContext",
    "add_command",
    "command",
    "get_all_commands",
    "get_command",
]
