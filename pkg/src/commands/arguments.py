"""
Shared Argument Types

argparse value types and option groups reused by several subcommands.
"""

import argparse
from typing import Optional

from ..microstructure import GRID_SHAPES, check_dims
from ..sensitivity import ObjectiveSpec


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {number}")
    return number


def non_negative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {number}")
    return number


def positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{value}'")
    if not number > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {number}")
    return number


def non_negative_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{value}'")
    if not number >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {number}")
    return number


def add_grid_arguments(parser: argparse.ArgumentParser, dims: int = 2, shape: Optional[int] = None) -> None:
    parser.add_argument("--dims", type=int, choices=(2, 3), default=dims, help="Spatial dimension")
    parser.add_argument("--shape", type=positive_int, default=shape, help="Grid side length in elements")


def grid_shape(dims: int, side: Optional[int]) -> tuple[int, ...]:
    """Grid shape from --dims/--shape (default shape per dimension)."""
    check_dims(dims)
    if side is None:
        return GRID_SHAPES[dims]
    return (side,) * dims


def add_objective_arguments(parser: argparse.ArgumentParser, target_required: bool = True) -> None:
    parser.add_argument(
        "--target-k",
        type=positive_float,
        required=target_required,
        default=None,
        help="Target bulk modulus K* (GPa)",
    )
    parser.add_argument("--objective", choices=("j1", "j2"), default="j1", help="Objective (j2 adds mean density)")
    parser.add_argument("--lambda", dest="lam", type=non_negative_float, default=0.0, help="Density weight of j2")


def objective_from_args(args: argparse.Namespace, K_star: Optional[float] = None) -> ObjectiveSpec:
    return ObjectiveSpec(
        kind=args.objective.upper(),
        K_star=K_star if K_star is not None else args.target_k,
        lam=args.lam,
    )
