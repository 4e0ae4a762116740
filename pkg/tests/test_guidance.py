"""Tests for loss-guided DDIM sampling."""

import numpy as np
import pytest
from pydantic import ValidationError

from src.config import get_settings
from src.denoiser import NetworkDenoiser, OracleDenoiser, init_model
from src.denoiser.config import DenoiserConfig
from src.diffusion import build_schedule, convert, ddim_step
from src.errors import BatchFailedError, GuidanceStepError, InputValidationError
from src.fem import homogenize
from src.guidance import (
    GuidanceConfig,
    SampleRecord,
    clip_prediction,
    guided_sample,
    load_samples,
    loss_gradient_at_xhat,
    pull_back,
    run_batch,
    save_samples,
)
from src.sensitivity import ObjectiveSpec


class NaNDenoiser:
    def predict_v(self, x_t, t):
        return np.full(np.shape(x_t), np.nan)

    def vjp(self, x_t, t, cotangent):
        return np.zeros(np.shape(x_t))


def make_config(**overrides) -> GuidanceConfig:
    values = {"objective": ObjectiveSpec(K_star=60.0), "N": 5, "eta": 0.0}
    values.update(overrides)
    return GuidanceConfig(**values)


def unguided_reference(denoiser, schedule, eta, rng, shape):
    """Plain DDIM sampling with the same random stream usage."""
    x = rng.standard_normal((*shape, 3))
    for i, t in enumerate(schedule.timesteps):
        _, x0_hat = convert(denoiser.predict_v(x, int(t)), x, int(t), schedule)
        z = rng.standard_normal(x.shape) if eta > 0 else None
        x = ddim_step(x, clip_prediction(x0_hat), i, eta, z, schedule)
    return np.clip(x, -1.0, 1.0)


# =============================================================================
# Configuration
# =============================================================================

class TestConfig:
    def test_defaults(self):
        config = GuidanceConfig(objective=ObjectiveSpec(K_star=10.0))
        assert config.N == 100 and config.mode == "full-vjp"
        assert np.allclose(config.channel_scales, [0.5, 0.02, 1.0])
        assert config.guided and not config.unguided().guided

    @pytest.mark.parametrize("field, value", [("rho_D", -1.0), ("rho_D", float("inf")), ("N", 0), ("mode", "exact")])
    def test_rejects_invalid(self, field, value):
        with pytest.raises(ValidationError):
            make_config(**{field: value})


# =============================================================================
# Gradient at the prediction
# =============================================================================

class TestGradient:
    def test_channel_scales(self, two_phase_grid):
        base = loss_gradient_at_xhat(two_phase_grid, make_config(scale_E=0.5)).values
        doubled = loss_gradient_at_xhat(two_phase_grid, make_config(scale_E=1.0)).values
        assert np.allclose(doubled[..., 0], 2.0 * base[..., 0])
        assert np.allclose(doubled[..., 1:], base[..., 1:])

    def test_clip_lifts_young_modulus(self):
        clipped = clip_prediction(np.full((2, 2, 3), -3.0))
        assert np.all(clipped[..., 0] > -1.0)
        assert np.all(clipped[..., 1:] == -1.0)

    def test_direct_pull_back_floors_alpha_bar(self):
        schedule = build_schedule()
        gradient = np.ones((2, 2, 3))
        pulled = pull_back(None, gradient, 999, gradient, schedule, "direct")
        assert np.allclose(pulled, 10.0)

    def test_full_pull_back_through_oracle_vanishes(self):
        schedule = build_schedule()
        x0 = np.zeros((2, 2, 3))
        x_t = np.ones((2, 2, 3))
        pulled = pull_back(OracleDenoiser(x0, schedule), x_t, 500, np.ones_like(x_t), schedule, "full-vjp")
        assert np.allclose(pulled, 0.0)


# =============================================================================
# Sampling
# =============================================================================

class TestGuidedSample:
    def test_oracle_reconstruction(self, two_phase_grid):
        schedule = build_schedule()
        oracle = OracleDenoiser(two_phase_grid, schedule)
        record = guided_sample(oracle, schedule, make_config(rho_D=0.0), np.random.default_rng(0), (4, 4))
        assert np.allclose(record.x0, two_phase_grid, atol=1e-6)
        assert record.K_s > 0 and record.J == pytest.approx((record.K_s - 60.0) ** 2)

    def test_unguided_chain_records_losses(self, two_phase_grid):
        schedule = build_schedule()
        oracle = OracleDenoiser(two_phase_grid, schedule)
        record = guided_sample(oracle, schedule, make_config(rho_D=0.0), np.random.default_rng(0), (4, 4))
        assert len(record.losses) == 5
        # Every prediction of the oracle is the known grid
        assert np.allclose(record.losses, record.J, rtol=1e-5)

    def test_guidance_at_the_minimizer_changes_nothing(self, monkeypatch, two_phase_grid):
        monkeypatch.setenv("COMPDIFF_FEM_SOLVER", "direct")
        get_settings.cache_clear()
        schedule = build_schedule()
        oracle = OracleDenoiser(two_phase_grid, schedule)
        objective = ObjectiveSpec(K_star=homogenize(two_phase_grid, relaxed=True).K)
        plain = guided_sample(oracle, schedule, make_config(objective=objective, rho_D=0.0), np.random.default_rng(0), (4, 4))
        guided = guided_sample(
            oracle, schedule, make_config(objective=objective, rho_D=1.0, mode="direct"),
            np.random.default_rng(0), (4, 4),
        )
        assert np.max(np.abs(guided.x0 - plain.x0)) <= 1e-8
        assert np.max(guided.losses) < 1e-12

    @pytest.mark.parametrize("eta", [0.0, 1.0])
    def test_zero_scale_matches_plain_ddim(self, eta):
        schedule = build_schedule()
        denoiser = NetworkDenoiser(init_model(DenoiserConfig(block_channels=(8, 16), mid_channels=16), seed=1))
        config = make_config(rho_D=0.0, eta=eta, N=4)
        record = guided_sample(denoiser, schedule, config, np.random.default_rng(9), (8, 8))
        expected = unguided_reference(denoiser, schedule.with_timesteps(4), eta, np.random.default_rng(9), (8, 8))
        assert np.array_equal(record.x0, expected)

    def test_guidance_lowers_the_objective(self, two_phase_grid):
        schedule = build_schedule()
        oracle = OracleDenoiser(two_phase_grid, schedule)
        objective = ObjectiveSpec(K_star=400.0)
        plain = guided_sample(oracle, schedule, make_config(objective=objective, rho_D=0.0), np.random.default_rng(0), (4, 4))
        guided = guided_sample(
            oracle, schedule, make_config(objective=objective, rho_D=1e-5, mode="direct"),
            np.random.default_rng(0), (4, 4),
        )
        assert len(guided.losses) == 5
        assert guided.J < plain.J

    def test_network_guidance_runs(self):
        schedule = build_schedule()
        denoiser = NetworkDenoiser(init_model(DenoiserConfig(block_channels=(8, 16), mid_channels=16), seed=0))
        record = guided_sample(denoiser, schedule, make_config(rho_D=1e-6, N=3), np.random.default_rng(0), (4, 4))
        assert record.x0.shape == (4, 4, 3)
        assert np.all(np.abs(record.x0) <= 1.0)
        assert len(record.losses) == 3 and all(np.isfinite(record.losses))

    def test_material_projection(self, small_catalog):
        schedule = build_schedule()
        denoiser = NetworkDenoiser(init_model(DenoiserConfig(block_channels=(8, 16), mid_channels=16), seed=0))
        config = make_config(rho_D=0.0, project_materials=True, N=3)
        record = guided_sample(denoiser, schedule, config, np.random.default_rng(0), (4, 4), catalog=small_catalog)
        rows = record.x0.reshape(-1, 3)
        distances = np.linalg.norm(rows[:, None, :] - small_catalog.normalized[None], axis=-1)
        assert np.allclose(distances.min(axis=1), 0.0)

    def test_projection_needs_catalog(self):
        schedule = build_schedule()
        with pytest.raises(InputValidationError):
            guided_sample(NaNDenoiser(), schedule, make_config(project_materials=True), np.random.default_rng(0), (4, 4))

    def test_non_finite_prediction(self):
        with pytest.raises(GuidanceStepError) as info:
            guided_sample(NaNDenoiser(), build_schedule(), make_config(), np.random.default_rng(0), (4, 4))
        assert info.value.step == 0


class TestBatch:
    def test_chains_use_their_own_streams(self, two_phase_grid):
        schedule = build_schedule()
        oracle = OracleDenoiser(two_phase_grid, schedule)
        config = make_config(rho_D=0.0, eta=1.0)
        records = run_batch(oracle, schedule, config, 3, seed=5, shape=(4, 4))
        assert [record.chain for record in records] == [0, 1, 2]
        assert all(record.success and record.seed == 5 for record in records)
        single = guided_sample(oracle, schedule, config, np.random.default_rng([5, 2]), (4, 4))
        assert np.array_equal(records[2].x0, single.x0)

    def test_all_chains_failed(self):
        with pytest.raises(BatchFailedError):
            run_batch(NaNDenoiser(), build_schedule(), make_config(), 2, seed=0, shape=(4, 4))

    def test_empty_batch(self):
        with pytest.raises(InputValidationError):
            run_batch(NaNDenoiser(), build_schedule(), make_config(), 0, seed=0, shape=(4, 4))


def test_samples_storage(tmp_path, two_phase_grid):
    records = [
        SampleRecord(seed=1, chain=0, x0=two_phase_grid, losses=[3.0, 2.0], K_s=40.0, J=400.0),
        SampleRecord(seed=1, chain=1, success=False, error="Sampling step 2: boom", failed_step=2),
    ]
    path = save_samples(records, tmp_path / "samples.cgs", metadata={"K_star": 60.0})
    loaded, metadata = load_samples(path)
    assert metadata == {"K_star": 60.0}
    assert np.allclose(loaded[0].x0, two_phase_grid, atol=1e-6)
    assert loaded[0].losses == [3.0, 2.0]
    assert loaded[1].x0 is None and not loaded[1].success and loaded[1].failed_step == 2
