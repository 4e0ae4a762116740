"""Tests for the velocity U-Net, its persistence and training."""

import numpy as np
import pytest
import torch

from src.artifacts import read_container, write_container
from src.denoiser import (
    DenoiserConfig,
    NetworkDenoiser,
    OracleDenoiser,
    TrainConfig,
    init_model,
    load_weights,
    save_loss_history,
    save_weights,
    train,
    validation_v_mse,
    warmup_cosine,
    zero_predictor_mse,
)
from src.diffusion import build_schedule, convert
from src.errors import (
    DenoiserInputError,
    IncompatibleWeightsError,
    InputValidationError,
)


def tiny_config(dims: int = 2, **overrides) -> DenoiserConfig:
    return DenoiserConfig(dims=dims, block_channels=(8, 16), mid_channels=16, **overrides)


@pytest.fixture
def grids():
    rng = np.random.default_rng(0)
    return rng.uniform(-1, 1, size=(6, 8, 8, 3))


# =============================================================================
# Configuration
# =============================================================================

class TestConfig:
    def test_widths_must_fit_groups(self):
        with pytest.raises(ValueError):
            DenoiserConfig(block_channels=(12, 16))

    def test_fingerprint_tracks_architecture(self):
        assert tiny_config().fingerprint() == tiny_config().fingerprint()
        assert tiny_config().fingerprint() != tiny_config(attention=True, attention_heads=4).fingerprint()

    def test_downsampling(self):
        assert tiny_config().downsampling == 4


# =============================================================================
# Network
# =============================================================================

class TestNetwork:
    @pytest.mark.parametrize("dims, shape", [(2, (8, 8)), (3, (4, 4, 4))])
    def test_output_shape(self, dims, shape):
        denoiser = NetworkDenoiser(init_model(tiny_config(dims), seed=0))
        x = np.random.default_rng(1).standard_normal((*shape, 3))
        assert denoiser.predict_v(x, 500).shape == x.shape

    def test_attention_variant(self):
        model = init_model(tiny_config(attention=True, attention_heads=4), seed=0)
        x = torch.zeros(2, 3, 8, 8)
        assert model(x, torch.tensor([0, 999])).shape == x.shape

    def test_initialization_is_seeded(self):
        first = init_model(tiny_config(), seed=3)
        second = init_model(tiny_config(), seed=3)
        for a, b in zip(first.parameters(), second.parameters()):
            assert torch.equal(a, b)

    def test_rejects_bad_inputs(self):
        denoiser = NetworkDenoiser(init_model(tiny_config(), seed=0))
        with pytest.raises(DenoiserInputError):
            denoiser.predict_v(np.zeros((6, 6, 3)), 10)
        with pytest.raises(DenoiserInputError):
            denoiser.predict_v(np.zeros((8, 8, 2)), 10)
        bad = np.zeros((8, 8, 3))
        bad[0, 0, 0] = np.nan
        with pytest.raises(DenoiserInputError):
            denoiser.predict_v(bad, 10)

    def test_vjp_matches_directional_derivative(self):
        denoiser = NetworkDenoiser(init_model(tiny_config(), seed=0, dtype=torch.float64))
        rng = np.random.default_rng(2)
        x = rng.standard_normal((8, 8, 3))
        cotangent = rng.standard_normal(x.shape)
        direction = rng.standard_normal(x.shape)
        h = 1e-6
        plus = np.sum(cotangent * denoiser.predict_v(x + h * direction, 300))
        minus = np.sum(cotangent * denoiser.predict_v(x - h * direction, 300))
        expected = (plus - minus) / (2 * h)
        actual = np.sum(denoiser.vjp(x, 300, cotangent) * direction)
        assert actual == pytest.approx(expected, rel=1e-5)


def test_oracle_predicts_exact_sample():
    schedule = build_schedule()
    x0 = np.random.default_rng(0).uniform(-1, 1, size=(4, 4, 3))
    oracle = OracleDenoiser(x0, schedule)
    x_t = np.random.default_rng(1).standard_normal(x0.shape)
    for t in (999, 500, 3):
        _, x0_hat = convert(oracle.predict_v(x_t, t), x_t, t, schedule)
        assert np.allclose(x0_hat, x0)


# =============================================================================
# Persistence
# =============================================================================

class TestWeights:
    def test_saved_network_reproduces_outputs(self, tmp_path):
        model = init_model(tiny_config(), seed=5)
        path = save_weights(model, tmp_path / "weights.cgw", metadata={"steps": 0})
        loaded = load_weights(path, expected=tiny_config())
        x = np.random.default_rng(0).standard_normal((8, 8, 3))
        assert np.allclose(NetworkDenoiser(model).predict_v(x, 40), NetworkDenoiser(loaded).predict_v(x, 40))

    def test_architecture_mismatch(self, tmp_path):
        path = save_weights(init_model(tiny_config(), seed=0), tmp_path / "weights.cgw")
        with pytest.raises(IncompatibleWeightsError):
            load_weights(path, expected=tiny_config(dims=3))

    def test_newer_format_rejected(self, tmp_path):
        path = save_weights(init_model(tiny_config(), seed=0), tmp_path / "weights.cgw")
        header, tensors = read_container(path)
        header["format_version"] = "2.0"
        write_container(path, header, tensors)
        with pytest.raises(IncompatibleWeightsError):
            load_weights(path)


# =============================================================================
# Training
# =============================================================================

class TestTraining:
    def test_warmup_cosine(self):
        assert warmup_cosine(0, 10, 110) == pytest.approx(0.1)
        assert warmup_cosine(9, 10, 110) == pytest.approx(1.0)
        assert warmup_cosine(60, 10, 110) == pytest.approx(0.5)
        assert warmup_cosine(110, 10, 110) == pytest.approx(0.0)

    def test_short_run(self, grids, tmp_path):
        config = TrainConfig(steps=6, batch_size=4, warmup=2, log_every=3)
        result = train(grids, config, tiny_config(), build_schedule(), seed=0)
        assert result.steps == 6
        assert all(np.isfinite(result.losses))
        assert result.learning_rates[0] == pytest.approx(0.5e-3)
        assert result.smoothed_loss(6, window=3) == pytest.approx(np.mean(result.losses[3:]))

        path = save_loss_history(result, tmp_path / "loss.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "step,loss,lr"
        assert len(lines) == 7

    def test_reproducible(self, grids):
        config = TrainConfig(steps=3, batch_size=2, warmup=1)
        first = train(grids, config, tiny_config(), build_schedule(), seed=4)
        second = train(grids, config, tiny_config(), build_schedule(), seed=4)
        assert first.losses == second.losses

    def test_zero_steps(self, grids):
        result = train(grids, TrainConfig(steps=0), tiny_config(), build_schedule(), seed=0)
        assert result.steps == 0
        assert result.summary()["final_loss"] is None

    def test_dimension_mismatch(self, grids):
        with pytest.raises(InputValidationError):
            train(grids, TrainConfig(steps=1), tiny_config(dims=3), build_schedule(), seed=0)

    def test_validation_metrics(self, grids):
        model = init_model(tiny_config(), seed=0)
        schedule = build_schedule()
        assert np.isfinite(validation_v_mse(model, grids[:2], schedule, seed=1))
        assert zero_predictor_mse(grids[:2], schedule, seed=1) > 0.0
