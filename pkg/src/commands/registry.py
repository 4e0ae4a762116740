"""
Command Registry

Centralized registry of the CLI subcommands with their help text,
argument builders and handlers.
"""

import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from ..artifacts.paths import sanitize_filename
from ..config import RunConfig

logger = logging.getLogger(__name__)


@dataclass
class CommandContext:
    """Resolved global options handed to every handler."""
    out: Path
    seed: int
    workers: Optional[int]
    version: str
    parameters: dict[str, Any] = field(default_factory=dict)

    def path(self, name: str) -> Path:
        """Artifact path inside the output directory."""
        return self.out / sanitize_filename(name)

    def write_run_config(self, command: str) -> Path:
        config = RunConfig.resolve(command, self.seed, self.out, self.version, self.parameters)
        return config.write(self.out)


Handler = Callable[[argparse.Namespace, CommandContext], int]
ArgumentBuilder = Callable[[argparse.ArgumentParser], None]


@dataclass
class Command:
    """Configuration for a subcommand."""
    name: str
    help: str
    handler: Handler
    arguments: Optional[ArgumentBuilder] = None

    def configure(self, parser: argparse.ArgumentParser) -> None:
        if self.arguments is not None:
            self.arguments(parser)


# Registry of all subcommands, filled by the @command decorator
COMMAND_REGISTRY: dict[str, Command] = {}


def command(name: str, help: str, arguments: Optional[ArgumentBuilder] = None) -> Callable[[Handler], Handler]:
    """Register a handler as a subcommand."""
    def register(handler: Handler) -> Handler:
        add_command(Command(name=name, help=help, handler=handler, arguments=arguments))
        return handler
    return register


def add_command(entry: Command) -> None:
    """Add a subcommand to the registry."""
    if entry.name in COMMAND_REGISTRY:
        logger.debug(f"Replacing registered command '{entry.name}'")
    COMMAND_REGISTRY[entry.name] = entry


def get_command(name: str) -> Optional[Command]:
    """Get a subcommand from the registry."""
    return COMMAND_REGISTRY.get(name)


def get_all_commands() -> dict[str, Command]:
    """Get all registered subcommands."""
    return COMMAND_REGISTRY.copy()
