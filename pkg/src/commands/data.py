"""
Data Commands

gen-catalog, gen-dataset, targets and bounds-check.
"""

import argparse
import csv
import logging

import numpy as np

from ..artifacts.paths import require_file
from ..evaluation import bounds_check, compute_moduli, k_gap_profile, plot_histogram, select_targets, write_json
from ..materials import generate_synthetic_catalog, load_catalog, save_catalog
from ..materials.catalog import DEFAULT_MAX_RECORDS, SYNTHETIC_NONEMPTY_CHUNKS
from ..microstructure import (
    Dataset,
    generate_dataset,
    load_dataset,
    particle_mask,
    save_dataset,
    validate_dataset,
)
from .arguments import add_grid_arguments, grid_shape, positive_int
from .registry import CommandContext, command

logger = logging.getLogger(__name__)

CATALOG_FILE = "catalog.csv"
DATASET_FILE = "dataset.cgd"


# =============================================================================
# gen-catalog
# =============================================================================

def _catalog_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--count", type=positive_int, default=DEFAULT_MAX_RECORDS, help="Number of materials")
    parser.add_argument(
        "--nonempty-chunks",
        type=positive_int,
        default=SYNTHETIC_NONEMPTY_CHUNKS,
        help="Distinct property chunks to populate",
    )


@command("gen-catalog", "Generate a synthetic material catalog", _catalog_arguments)
def gen_catalog(args: argparse.Namespace, context: CommandContext) -> int:
    catalog = generate_synthetic_catalog(context.seed, n=args.count, nonempty_chunks=args.nonempty_chunks)
    path = save_catalog(catalog, context.path(CATALOG_FILE))
    logger.info(f"Wrote {len(catalog)} materials ({len(catalog.nonempty_chunks)} chunks) to {path}")
    return 0


# =============================================================================
# gen-dataset
# =============================================================================

def _dataset_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--catalog", required=True, help="Material catalog CSV")
    parser.add_argument("--count", type=positive_int, default=1000, help="Number of samples")
    add_grid_arguments(parser)


@command("gen-dataset", "Generate rasterized training microstructures", _dataset_arguments)
def gen_dataset(args: argparse.Namespace, context: CommandContext) -> int:
    catalog = load_catalog(require_file(args.catalog))
    shape = grid_shape(args.dims, args.shape)
    dataset = generate_dataset(
        catalog,
        args.count,
        args.dims,
        shape,
        context.seed,
        path=context.path(DATASET_FILE),
        workers=context.workers,
    )
    problems = validate_dataset(dataset)
    for problem in problems:
        logger.error(problem)
    return 2 if problems else 0


# =============================================================================
# targets
# =============================================================================

def _targets_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", required=True, help="Dataset container")
    parser.add_argument("--count", type=positive_int, default=5, help="Number of targets")
    parser.add_argument("--bins", type=positive_int, default=20, help="Histogram bins of the gap profile")


def write_moduli(K: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["index", "K"])
        for index, value in enumerate(K):
            writer.writerow([index, repr(float(value))])


@command("targets", "Compute dataset moduli and select target values", _targets_arguments)
def targets(args: argparse.Namespace, context: CommandContext) -> int:
    dataset = load_dataset(require_file(args.dataset))
    K = compute_moduli(dataset.grids, workers=context.workers)
    values = select_targets(K, args.count)
    profile = k_gap_profile(K, args.bins)

    write_moduli(K, context.path("moduli.csv"))
    write_json(
        {
            "targets": values.tolist(),
            "count": int(np.isfinite(K).sum()),
            "failed": int((~np.isfinite(K)).sum()),
            "K_min": float(np.nanmin(K)),
            "K_max": float(np.nanmax(K)),
            "gap_profile": profile.to_dict(),
        },
        context.path("targets.json"),
    )
    plot_histogram(K, context.path("hist_K.svg"), "bulk modulus K (GPa)", "Dataset moduli", markers=values.tolist())
    logger.info(f"Targets: {', '.join(f'{value:.2f}' for value in values)}")
    return 3 if not np.all(np.isfinite(K)) else 0


# =============================================================================
# bounds-check
# =============================================================================

def _bounds_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--dataset", help="Existing dataset container")
    source.add_argument("--catalog", help="Catalog for freshly generated samples")
    parser.add_argument("--count", type=positive_int, default=500, help="Fresh samples to generate")
    add_grid_arguments(parser, dims=3, shape=16)
    parser.add_argument("--max-outside", type=float, default=0.10, help="Allowed fraction outside the bounds")
    parser.add_argument("--max-violation", type=float, default=0.05, help="Allowed relative violation")


def _bounds_dataset(args: argparse.Namespace, context: CommandContext) -> Dataset:
    if args.dataset:
        return load_dataset(require_file(args.dataset))
    catalog = load_catalog(require_file(args.catalog))
    shape = grid_shape(args.dims, args.shape)
    return generate_dataset(catalog, args.count, args.dims, shape, context.seed, workers=context.workers)


@command("bounds-check", "Check computed moduli against Voigt-Reuss bounds", _bounds_arguments)
def bounds_check_command(args: argparse.Namespace, context: CommandContext) -> int:
    dataset = _bounds_dataset(args, context)
    if not args.dataset:
        save_dataset(dataset, context.path(DATASET_FILE))
    K = compute_moduli(dataset.grids, workers=context.workers)
    fractions = [float(particle_mask(sample.layout, dataset.shape).mean()) for sample in dataset.samples]
    report = bounds_check([sample.theta for sample in dataset.samples], K, dataset.dims, fractions)
    write_json(report.to_dict(), context.path("bounds.json"))

    logger.info(
        f"{report.outside}/{report.count} outside the bounds "
        f"({report.fraction_outside:.1%}, max violation {report.max_relative_violation:.2%})"
    )
    failed = (
        report.count < len(K)
        or report.fraction_outside > args.max_outside
        or report.max_relative_violation > args.max_violation
    )
    return 3 if failed else 0
