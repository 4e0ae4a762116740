"""
Training Command
"""

import argparse
import logging

import numpy as np

from ..artifacts.paths import require_file
from ..denoiser import (
    DenoiserConfig,
    TrainConfig,
    save_loss_history,
    save_weights,
    train,
    validation_v_mse,
    zero_predictor_mse,
)
from ..diffusion import build_schedule
from ..errors import InputValidationError
from ..evaluation import write_json
from ..microstructure import load_dataset
from .arguments import non_negative_int, positive_float, positive_int
from .registry import CommandContext, command

logger = logging.getLogger(__name__)

WEIGHTS_FILE = "weights.cgw"


def _train_arguments(parser: argparse.ArgumentParser) -> None:
    defaults = TrainConfig()
    parser.add_argument("--dataset", required=True, help="Dataset container")
    parser.add_argument("--steps", type=non_negative_int, default=defaults.steps, help="Optimizer steps")
    parser.add_argument("--batch-size", type=positive_int, default=defaults.batch_size, help="Samples per step")
    parser.add_argument("--lr", type=positive_float, default=defaults.peak_lr, help="Peak learning rate")
    parser.add_argument("--warmup", type=non_negative_int, default=defaults.warmup, help="Warmup steps")
    parser.add_argument("--log-every", type=positive_int, default=defaults.log_every, help="Logging interval")
    parser.add_argument("--attention", action="store_true", help="Self-attention in the bottleneck")
    parser.add_argument("--holdout", type=float, default=0.1, help="Fraction of samples held out for validation")


def split_holdout(count: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (train, held-out) index split."""
    if not 0.0 <= fraction < 1.0:
        raise InputValidationError(f"Holdout fraction must lie in [0, 1), got {fraction}")
    order = np.random.default_rng([seed, count]).permutation(count)
    held = int(round(fraction * count))
    return np.sort(order[held:]), np.sort(order[:held])


@command("train", "Train the velocity-predicting denoiser", _train_arguments)
def train_command(args: argparse.Namespace, context: CommandContext) -> int:
    dataset = load_dataset(require_file(args.dataset))
    denoiser_config = DenoiserConfig(dims=dataset.dims, attention=args.attention)
    if any(side % denoiser_config.downsampling for side in dataset.shape):
        raise InputValidationError(
            f"Grid sides {dataset.shape} must be divisible by {denoiser_config.downsampling}"
        )
    train_config = TrainConfig(
        steps=args.steps,
        batch_size=args.batch_size,
        peak_lr=args.lr,
        warmup=min(args.warmup, args.steps),
        log_every=args.log_every,
    )
    schedule = build_schedule()

    train_index, held_index = split_holdout(len(dataset), args.holdout, context.seed)
    result = train(dataset.grids[train_index], train_config, denoiser_config, schedule, context.seed)

    save_weights(
        result.model,
        context.path(WEIGHTS_FILE),
        metadata={"train": train_config.model_dump(mode="json"), "seed": context.seed, **result.summary()},
    )
    save_loss_history(result, context.path("loss.csv"))

    summary = {"train_samples": int(len(train_index)), "held_out": int(len(held_index)), **result.summary()}
    if len(held_index):
        held = dataset.grids[held_index]
        summary["validation_v_mse"] = validation_v_mse(result.model, held, schedule, context.seed)
        summary["zero_predictor_mse"] = zero_predictor_mse(held, schedule, context.seed)
        logger.info(
            f"Held-out v-MSE {summary['validation_v_mse']:.4f} "
            f"(zero predictor {summary['zero_predictor_mse']:.4f})"
        )
    write_json(summary, context.path("train_summary.json"))
    return 0
