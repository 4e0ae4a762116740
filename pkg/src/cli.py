#!/usr/bin/env python3
"""
compdiff Command Line

Entry point binding the subcommands of the registry into one parser with
shared --seed/--out/--config/--workers/--log-level options. Exit codes:
0 success, 1 usage error, 2 validation error, 3 numerical failure.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .artifacts.paths import require_file, resolve_output_dir
from .commands import CommandContext, get_all_commands, get_command
from .config import get_settings, load_parameters
from .errors import CompositeDesignError, UsageError

logger = logging.getLogger("compdiff")

_GLOBAL_KEYS = {"command", "seed", "out", "config", "workers", "log_level"}


class ArgumentParser(argparse.ArgumentParser):
    """Parser raising UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="compdiff", description="Inverse composite design by loss-guided diffusion")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="Root random seed")
    parser.add_argument("--out", default="out", help="Output directory")
    parser.add_argument("--config", default=None, help="JSON document with command parameters")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes (0 = all cores)")
    parser.add_argument("--log-level", default=None, help="Logging level (DEBUG/INFO/WARNING/ERROR)")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for name, entry in get_all_commands().items():
        entry.configure(subparsers.add_parser(name, help=entry.help, description=entry.help))
    return parser


def _apply_config(parser: ArgumentParser, argv: Sequence[str]) -> None:
    """Install --config values as defaults so explicit flags win."""
    pre = ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return

    parameters = load_parameters(require_file(known.config))
    choices = parser._subparsers._group_actions[0].choices
    name = next((token for token in argv if token in choices), None)
    if name is None:
        return
    subparser = choices[name]
    accepted = {action.dest for action in subparser._actions}
    unknown = sorted(set(parameters) - accepted - _GLOBAL_KEYS)
    if unknown:
        raise UsageError(f"Unknown parameters in {known.config}: {', '.join(unknown)}")

    subparser.set_defaults(**{key: value for key, value in parameters.items() if key in accepted})
    parser.set_defaults(**{key: parameters[key] for key in ("seed", "workers") if key in parameters})
    # Required options may come from the config
    for action in subparser._actions:
        if action.dest in parameters:
            action.required = False


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        parser = build_parser()
        _apply_config(parser, argv)
        args = parser.parse_args(argv)

        logging.basicConfig(
            level=(args.log_level or settings.log_level).upper(),
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            force=True,
        )

        entry = get_command(args.command)
        parameters = {key: value for key, value in vars(args).items() if key not in _GLOBAL_KEYS}
        context = CommandContext(
            out=resolve_output_dir(args.out),
            seed=args.seed,
            workers=args.workers,
            version=__version__,
            parameters=parameters,
        )
        context.write_run_config(args.command)
        logger.info(f"Running {args.command} (seed {args.seed}) into {context.out}")
        return int(entry.handler(args, context))

    except CompositeDesignError as e:
        logger.error(str(e))
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        return 2
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return 2


def main() -> None:
    """Console script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
