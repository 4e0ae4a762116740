"""
Sampling Command
"""

import argparse
import logging

from ..artifacts.paths import require_file
from ..denoiser import NetworkDenoiser, load_weights
from ..diffusion import build_schedule
from ..errors import UsageError
from ..evaluation import write_json
from ..guidance import GuidanceConfig, run_batch, save_samples
from ..materials import load_catalog
from .arguments import (
    add_objective_arguments,
    grid_shape,
    non_negative_float,
    objective_from_args,
    positive_int,
)
from .registry import CommandContext, command

logger = logging.getLogger(__name__)

SAMPLES_FILE = "samples.cgs"


def _sample_arguments(parser: argparse.ArgumentParser) -> None:
    defaults = GuidanceConfig.model_fields
    parser.add_argument("--weights", required=True, help="Trained weights")
    parser.add_argument("--catalog", help="Material catalog (required with --project-materials)")
    add_objective_arguments(parser)
    parser.add_argument("--rho-d", type=non_negative_float, default=defaults["rho_D"].default, help="Guidance scale (0 = unguided)")
    parser.add_argument("--steps", type=positive_int, default=defaults["N"].default, help="Sampling steps N")
    parser.add_argument("--eta", type=non_negative_float, default=defaults["eta"].default, help="DDIM noise scale")
    parser.add_argument("--mode", choices=("full-vjp", "direct"), default="full-vjp", help="Guidance pull-back")
    parser.add_argument("--scale-e", type=non_negative_float, default=defaults["scale_E"].default)
    parser.add_argument("--scale-nu", type=non_negative_float, default=defaults["scale_nu"].default)
    parser.add_argument("--scale-rho", type=non_negative_float, default=defaults["scale_rho"].default)
    parser.add_argument("--project-materials", action="store_true", help="Snap predictions to catalog materials")
    parser.add_argument("--count", type=positive_int, default=1, help="Number of chains")
    parser.add_argument("--shape", type=positive_int, default=None, help="Grid side length in elements")


@command("sample", "Draw loss-guided samples for a target modulus", _sample_arguments)
def sample_command(args: argparse.Namespace, context: CommandContext) -> int:
    if args.project_materials and not args.catalog:
        raise UsageError("--project-materials requires --catalog")

    model = load_weights(require_file(args.weights))
    denoiser = NetworkDenoiser(model)
    catalog = load_catalog(require_file(args.catalog)) if args.catalog else None
    shape = grid_shape(model.config.dims, args.shape)

    config = GuidanceConfig(
        objective=objective_from_args(args),
        rho_D=args.rho_d,
        scale_E=args.scale_e,
        scale_nu=args.scale_nu,
        scale_rho=args.scale_rho,
        N=args.steps,
        eta=args.eta,
        mode=args.mode,
        project_materials=args.project_materials,
    )
    schedule = build_schedule(n_steps=config.N)
    records = run_batch(
        denoiser,
        schedule,
        config,
        args.count,
        context.seed,
        shape,
        catalog=catalog,
        workers=context.workers,
    )

    metadata = {
        "guidance": config.model_dump(mode="json", by_alias=True),
        "K_star": config.objective.K_star,
        "shape": list(shape),
        "weights": str(args.weights),
    }
    save_samples(records, context.path(SAMPLES_FILE), metadata)
    write_json(
        {**metadata, "records": [record.to_dict() for record in records]},
        context.path("samples.json"),
    )

    failed = sum(not record.success for record in records)
    return 3 if failed else 0
