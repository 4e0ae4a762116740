"""
Run Configuration

The resolved parameters of one command invocation, written next to its
artifacts so the run can be repeated.
"""

import json
import logging
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from ..errors import MalformedFileError
from .settings import get_settings

logger = logging.getLogger(__name__)

RUN_CONFIG_NAME = "run_config.json"


class RunConfig(BaseModel):
    """Resolved configuration of a command run."""

    command: str = Field(description="Subcommand name")
    seed: int = Field(description="Root seed of the run")
    out: str = Field(description="Output directory")
    version: str = Field(description="Package version that produced the run")
    parameters: dict[str, Any] = Field(default_factory=dict, description="Command parameters after overrides")
    settings: dict[str, Any] = Field(default_factory=dict, description="Resolved environment settings")

    @classmethod
    def resolve(cls, command: str, seed: int, out: Path | str, version: str, parameters: dict[str, Any]) -> "RunConfig":
        return cls(
            command=command,
            seed=seed,
            out=str(out),
            version=version,
            parameters=parameters,
            settings=get_settings().model_dump(mode="json"),
        )

    def write(self, directory: Path | str) -> Path:
        """Write run_config.json into ``directory``."""
        path = Path(directory) / RUN_CONFIG_NAME
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.debug(f"Wrote {path}")
        return path


def load_parameters(path: Path | str) -> dict[str, Any]:
    """
    Read command parameters from a JSON config document.

    A file written as run_config.json is accepted too; its ``parameters``
    (and ``seed``) are used.

    Raises:
        MalformedFileError: If the file is unreadable or not a JSON object
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise MalformedFileError(str(path), None, f"cannot read file ({e})") from e
    except json.JSONDecodeError as e:
        raise MalformedFileError(str(path), e.lineno, e.msg) from e

    if not isinstance(data, dict):
        raise MalformedFileError(str(path), None, "expected a JSON object")
    if isinstance(data.get("parameters"), dict):
        parameters = dict(data["parameters"])
        if "seed" in data:
            parameters.setdefault("seed", data["seed"])
        return parameters
    return data
