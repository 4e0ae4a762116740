"""
Analysis Commands

backproject, evaluate and gradcheck.
"""

import argparse
import logging

import numpy as np

from ..artifacts.paths import require_file
from ..backprojection import backproject_batch, save_backprojections
from ..errors import EvaluationError, InputValidationError
from ..evaluation import (
    DEFAULT_REPEATS,
    evaluate_designs,
    metric_report,
    plot_histogram,
    result_row,
    write_json,
    write_results_csv,
)
from ..guidance import load_samples
from ..materials import generate_synthetic_catalog, load_catalog
from ..microstructure import compose_grid, load_dataset
from ..sensitivity import gradient_check
from .arguments import (
    add_grid_arguments,
    add_objective_arguments,
    grid_shape,
    objective_from_args,
    positive_float,
    positive_int,
)
from .registry import CommandContext, command

logger = logging.getLogger(__name__)


def _load_grids(args: argparse.Namespace) -> tuple[np.ndarray, list, dict]:
    """Grids, labels and metadata from --samples or --dataset."""
    if getattr(args, "dataset", None):
        dataset = load_dataset(require_file(args.dataset))
        return dataset.grids, [sample.index for sample in dataset.samples], {}
    records, metadata = load_samples(require_file(args.samples))
    kept = [record for record in records if record.success and record.x0 is not None]
    skipped = len(records) - len(kept)
    if skipped:
        logger.warning(f"Skipping {skipped} failed chains")
    if not kept:
        raise InputValidationError(f"{args.samples}: no successful samples")
    labels = [record.chain for record in kept]
    metadata["K_s"] = [record.K_s for record in kept]
    return np.stack([record.x0 for record in kept]), labels, metadata


# =============================================================================
# backproject
# =============================================================================

def _backproject_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--samples", help="Samples container")
    source.add_argument("--dataset", help="Dataset container")
    parser.add_argument("--catalog", required=True, help="Material catalog CSV")


@command("backproject", "Recover design parameters from generated grids", _backproject_arguments)
def backproject_command(args: argparse.Namespace, context: CommandContext) -> int:
    catalog = load_catalog(require_file(args.catalog))
    grids, labels, _ = _load_grids(args)
    results = backproject_batch(grids, catalog, seed=context.seed, workers=context.workers)
    save_backprojections(results, context.path("backprojection.json"), labels)
    return 0


# =============================================================================
# evaluate
# =============================================================================

def _evaluate_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", required=True, help="Samples container")
    parser.add_argument("--catalog", required=True, help="Material catalog CSV")
    parser.add_argument("--target-k", type=positive_float, default=None, help="Target K* (default: from the samples)")
    parser.add_argument("--repeats", type=positive_int, default=DEFAULT_REPEATS, help="Microstructures per design")
    parser.add_argument("--shape", type=positive_int, default=None, help="Grid side of the repeats")
    parser.add_argument(
        "--no-closest-material",
        action="store_true",
        help="Evaluate the fitted materials instead of their catalog neighbors",
    )


@command("evaluate", "Evaluate backprojected designs against the target", _evaluate_arguments)
def evaluate_command(args: argparse.Namespace, context: CommandContext) -> int:
    catalog = load_catalog(require_file(args.catalog))
    grids, labels, metadata = _load_grids(args)
    K_star = args.target_k if args.target_k is not None else metadata.get("K_star")
    if K_star is None:
        raise InputValidationError("No target modulus: pass --target-k")

    dims = grids.ndim - 2
    shape = grid_shape(dims, args.shape) if args.shape else tuple(grids.shape[1:-1])

    projections = backproject_batch(grids, catalog, seed=context.seed, workers=context.workers)
    thetas = [p.raw_theta if args.no_closest_material else p.theta_hat for p in projections]
    results = evaluate_designs(
        thetas, K_star, args.repeats, context.seed, shape, labels=labels, workers=context.workers
    )

    K_s = metadata.get("K_s", [None] * len(results))
    rows = []
    evaluated = []
    for index, result in enumerate(results):
        if result is None:
            continue
        evaluated.append(result)
        rows.append(result_row(result, K_s[index], projections[index].V_m, projections[index].d_m))
    if not evaluated:
        raise EvaluationError("No design could be evaluated")

    write_results_csv(rows, context.path("results.csv"))
    report = metric_report(evaluated, catalog)
    write_json(
        {
            "K_star": K_star,
            "samples": len(results),
            "evaluated": len(evaluated),
            "unreliable": sum(not result.reliable for result in evaluated),
            "closest_material": not args.no_closest_material,
            "mean_V_m": float(np.mean([p.V_m for p in projections])),
            "mean_d_m": float(np.mean([p.d_m for p in projections])),
            "detection_failures": sum(p.rejected for p in projections),
            "metrics": report.to_dict(),
        },
        context.path("summary.json"),
    )
    plot_histogram([r.K_theta for r in evaluated], context.path("hist_K_theta.svg"), "K_theta (GPa)", markers=[K_star])
    plot_histogram([r.eps_r for r in evaluated], context.path("hist_eps_r.svg"), "relative error eps_r")

    for key, value in report.frac.items():
        logger.info(f"frac({key}) = {value:.3f}, cov = {report.cov[key]:.3f}")
    return 0 if len(evaluated) == len(results) else 3


# =============================================================================
# gradcheck
# =============================================================================

def _gradcheck_arguments(parser: argparse.ArgumentParser) -> None:
    add_grid_arguments(parser, dims=2, shape=4)
    add_objective_arguments(parser, target_required=False)
    parser.add_argument("--step", type=positive_float, default=1e-4, help="Finite-difference step")
    parser.add_argument("--rel-tol", type=positive_float, default=1e-4, help="Relative tolerance")


def random_two_phase_grid(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Grid with two random synthetic materials on a random mask holding both."""
    catalog = generate_synthetic_catalog(int(rng.integers(2 ** 31)), n=16)
    matrix, particle = rng.choice(len(catalog), size=2, replace=False)
    mask = rng.random(shape) < 0.5
    mask.flat[0], mask.flat[-1] = True, False
    return compose_grid(mask, catalog.normalized[matrix], catalog.normalized[particle])


@command("gradcheck", "Compare adjoint and finite-difference gradients", _gradcheck_arguments)
def gradcheck_command(args: argparse.Namespace, context: CommandContext) -> int:
    shape = grid_shape(args.dims, args.shape)
    rng = np.random.default_rng(context.seed)
    grid = random_two_phase_grid(shape, rng)
    spec = objective_from_args(args, K_star=args.target_k or 50.0)

    report = gradient_check(grid, spec, step=args.step, rel_tol=args.rel_tol)
    write_json(
        {"shape": list(shape), "objective": spec.model_dump(by_alias=True), **report.to_dict()},
        context.path("gradcheck.json"),
    )
    logger.info(f"Max relative error {report.max_rel_error:.2e} over {report.n_components} components")
    return 0 if report.passed else 3
