"""
Denoiser Training

v-prediction training with AdamW, linear warmup into a cosine decay and
global gradient-norm clipping, plus held-out v-MSE evaluation.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F

from ..diffusion import Schedule, q_sample, v_target
from ..errors import InputValidationError, TrainingDivergedError
from .config import DenoiserConfig, TrainConfig
from .model import init_model
from .network import VelocityUNet

logger = logging.getLogger(__name__)


@dataclass
class TrainResult:
    """Trained network and its loss history."""
    model: VelocityUNet
    losses: list[float] = field(default_factory=list)
    learning_rates: list[float] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.losses)

    def smoothed_loss(self, step: int, window: int = 50) -> float:
        """Mean loss over the ``window`` steps ending at ``step`` (1-based)."""
        if not 1 <= step <= len(self.losses):
            raise InputValidationError(f"Step {step} outside 1..{len(self.losses)}")
        start = max(0, step - window)
        return float(np.mean(self.losses[start:step]))

    def summary(self) -> dict:
        return {
            "steps": self.steps,
            "final_loss": self.losses[-1] if self.losses else None,
        }


def warmup_cosine(step: int, warmup: int, total: int) -> float:
    """LR multiplier: linear warmup to 1, then cosine decay to 0."""
    if warmup and step < warmup:
        return (step + 1) / warmup
    decay_steps = max(total - warmup, 1)
    progress = min(max(step - warmup, 0) / decay_steps, 1.0)
    return 0.5 * (1.0 + math.cos(math.pi * progress))


def to_channels_first(grids: np.ndarray) -> torch.Tensor:
    """(N, *spatial, 3) numpy grids -> (N, 3, *spatial) float32 tensor."""
    return torch.from_numpy(np.ascontiguousarray(np.moveaxis(np.asarray(grids, dtype=np.float32), -1, 1)))


def train(
    grids: np.ndarray,
    train_config: TrainConfig,
    denoiser_config: DenoiserConfig,
    schedule: Schedule,
    seed: int,
    model: Optional[VelocityUNet] = None,
) -> TrainResult:
    """
    Train a velocity U-Net on a dataset of grids.

    Each step draws a batch with replacement, t uniform over [0, T-1] and
    standard normal noise, and minimizes the MSE to the v-target.

    Args:
        grids: Training grids (N, *spatial, 3) in normalized space
        train_config: Optimizer and loop settings
        denoiser_config: Architecture
        schedule: Noise schedule
        seed: Seed of initialization and batch/noise draws
        model: Continue from this network instead of a fresh one

    Returns:
        TrainResult

    Raises:
        TrainingDivergedError: If the loss becomes non-finite
    """
    data = to_channels_first(grids)
    if data.shape[0] == 0:
        raise InputValidationError("Cannot train on an empty dataset")
    if data.ndim - 2 != denoiser_config.dims:
        raise InputValidationError(f"{data.ndim - 2}D dataset does not match a {denoiser_config.dims}D network")

    model = model if model is not None else init_model(denoiser_config, seed)
    result = TrainResult(model=model)
    if train_config.steps == 0:
        return result

    generator = torch.Generator().manual_seed(seed)
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=train_config.peak_lr,
        betas=(train_config.beta1, train_config.beta2),
        eps=train_config.eps,
        weight_decay=train_config.weight_decay,
    )
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: warmup_cosine(step, train_config.warmup, train_config.steps)
    )

    model.train()
    for step in range(1, train_config.steps + 1):
        index = torch.randint(0, data.shape[0], (train_config.batch_size,), generator=generator)
        x0 = data[index]
        t = torch.randint(0, schedule.T, (train_config.batch_size,), generator=generator)
        eps = torch.randn(x0.shape, generator=generator)

        x_t = q_sample(x0, t, eps, schedule)
        loss = F.mse_loss(model(x_t, t), v_target(x0, eps, t, schedule))
        value = float(loss.item())
        if not math.isfinite(value):
            raise TrainingDivergedError(step)

        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), train_config.grad_clip)
        optimizer.step()
        result.learning_rates.append(scheduler.get_last_lr()[0])
        scheduler.step()
        result.losses.append(value)

        if step % train_config.log_every == 0 or step == train_config.steps:
            logger.info(f"Step {step}/{train_config.steps}: loss {value:.5f} (lr {result.learning_rates[-1]:.2e})")

    model.eval()
    return result


def save_loss_history(result: TrainResult, path: Path | str) -> Path:
    """Write step, loss and learning rate as CSV."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["step", "loss", "lr"])
        for step, (loss, lr) in enumerate(zip(result.losses, result.learning_rates), start=1):
            writer.writerow([step, repr(loss), repr(lr)])
    return path


# =============================================================================
# Held-out evaluation
# =============================================================================

def _validation_batches(grids: np.ndarray, schedule: Schedule, seed: int, draws: int):
    data = to_channels_first(grids)
    generator = torch.Generator().manual_seed(seed)
    for _ in range(draws):
        t = torch.randint(0, schedule.T, (data.shape[0],), generator=generator)
        eps = torch.randn(data.shape, generator=generator)
        yield data, t, q_sample(data, t, eps, schedule), v_target(data, eps, t, schedule)


def validation_v_mse(
    model: VelocityUNet,
    grids: np.ndarray,
    schedule: Schedule,
    seed: int,
    draws: int = 4,
) -> float:
    """
    Mean squared v-error on held-out grids over random (t, eps) draws.

    Args:
        model: Network
        grids: Held-out grids (N, *spatial, 3)
        schedule: Noise schedule
        seed: Seed of the (t, eps) draws
        draws: Noise draws per grid

    Returns:
        Mean squared error
    """
    dtype = next(model.parameters()).dtype
    errors = []
    model.eval()
    with torch.no_grad():
        for _, t, x_t, target in _validation_batches(grids, schedule, seed, draws):
            prediction = model(x_t.to(dtype), t)
            errors.append(float(F.mse_loss(prediction, target.to(dtype))))
    return float(np.mean(errors))


def zero_predictor_mse(grids: np.ndarray, schedule: Schedule, seed: int, draws: int = 4) -> float:
    """v-MSE of the constant-zero predictor on the same draws as validation_v_mse."""
    errors = [
        float(torch.mean(target ** 2))
        for _, _, _, target in _validation_batches(grids, schedule, seed, draws)
    ]
    return float(np.mean(errors))
