"""Tests for design sampling, packing, rasterization and datasets."""

import math

import numpy as np
import pytest

from src.errors import InputValidationError, PackingInfeasibleError
from src.microstructure import (
    DESIGN_RANGES,
    DesignParams,
    ParticleLayout,
    generate_dataset,
    load_dataset,
    pack_particles,
    particle_count,
    particle_mask,
    particle_volume,
    rasterize,
    realized_volume_fraction,
    sample_design_params,
    save_dataset,
    stochastic_round,
    validate_dataset,
)


# =============================================================================
# Design parameters
# =============================================================================

class TestParticleCount:
    def test_circles(self):
        real, count = particle_count(0.05, 0.075, 2)
        assert real == pytest.approx(2.829, abs=1e-3)
        assert count == 3

    def test_spheres(self):
        real, count = particle_count(0.10, 0.10, 3)
        assert real == pytest.approx(23.87, abs=1e-2)
        assert count == 24

    def test_volume_includes_pi(self):
        assert particle_volume(0.5, 2) == pytest.approx(math.pi / 4)
        assert particle_volume(0.5, 3) == pytest.approx(math.pi / 6)

    def test_rejects_bad_input(self):
        with pytest.raises(InputValidationError):
            particle_count(0.1, 0.0, 2)
        with pytest.raises(InputValidationError):
            particle_count(0.1, 0.1, 4)


def test_stochastic_round_is_unbiased():
    rng = np.random.default_rng(1)
    draws = np.array([stochastic_round(2.3, rng) for _ in range(5000)])
    assert set(np.unique(draws)) == {2, 3}
    assert draws.mean() == pytest.approx(2.3, abs=0.03)
    assert stochastic_round(4.0, rng) == 4


@pytest.mark.parametrize("dims", [2, 3])
def test_sampled_designs_respect_ranges(synthetic_catalog, dims):
    rng = np.random.default_rng(dims)
    (f_low, f_high), (d_low, d_high) = DESIGN_RANGES[dims]
    for _ in range(50):
        theta = sample_design_params(synthetic_catalog, dims, rng)
        assert f_low <= theta.f_p <= f_high
        assert d_low <= 2 * theta.r_p <= d_high
        theta.validate(dims)


def test_design_density_mixes_phases():
    theta = DesignParams(E_m=10, E_p=100, nu_m=0.3, nu_p=0.2, rho_m=1.0, rho_p=3.0, r_p=0.1, f_p=0.25)
    assert theta.density == pytest.approx(1.5)
    assert DesignParams.from_dict(theta.to_dict()) == theta


# =============================================================================
# Packing
# =============================================================================

class TestPacking:
    @pytest.mark.parametrize("dims, n, r", [(2, 12, 0.08), (3, 20, 0.1)])
    def test_layout_is_valid(self, dims, n, r):
        layout = pack_particles(n, r, dims, np.random.default_rng(0))
        assert layout.count == n
        assert layout.dims == dims
        assert layout.violations() == []

    def test_deterministic_for_seed(self):
        first = pack_particles(8, 0.1, 2, np.random.default_rng(5))
        second = pack_particles(8, 0.1, 2, np.random.default_rng(5))
        assert np.array_equal(first.centers, second.centers)

    def test_zero_particles(self):
        layout = pack_particles(0, 0.1, 3, np.random.default_rng(0))
        assert layout.count == 0

    def test_infeasible(self):
        with pytest.raises(PackingInfeasibleError):
            pack_particles(10, 0.3, 2, np.random.default_rng(0), max_restarts=2, max_updates=50)

    def test_explicit_zero_updates_are_honored(self):
        # A crowded random placement is left as drawn and rejected
        with pytest.raises(PackingInfeasibleError):
            pack_particles(12, 0.08, 2, np.random.default_rng(0), max_restarts=1, max_updates=0)
        layout = pack_particles(1, 0.2, 2, np.random.default_rng(0), max_restarts=1, max_updates=0)
        assert layout.count == 1

    def test_no_restarts_rejected(self):
        with pytest.raises(InputValidationError):
            pack_particles(3, 0.1, 2, np.random.default_rng(0), max_restarts=0)

    def test_radius_too_large(self):
        with pytest.raises(PackingInfeasibleError):
            pack_particles(1, 0.5, 2, np.random.default_rng(0))

    def test_violations_reported(self):
        layout = ParticleLayout(centers=np.array([[0.3, 0.3], [0.35, 0.3]]), radius=0.1)
        assert any("overlap" in problem for problem in layout.violations())


# =============================================================================
# Rasterization
# =============================================================================

def test_rasterized_circle():
    layout = ParticleLayout(centers=np.array([[0.5, 0.5]]), radius=0.125)
    mask = particle_mask(layout, (64, 64))
    assert realized_volume_fraction(mask) == pytest.approx(math.pi * 0.125 ** 2, abs=0.005)
    assert mask[32, 32] and not mask[0, 0]


def test_rasterize_uses_two_materials():
    theta = DesignParams(E_m=10, E_p=100, nu_m=0.3, nu_p=0.2, rho_m=1.0, rho_p=3.0, r_p=0.2, f_p=0.1)
    layout = ParticleLayout(centers=np.array([[0.5, 0.5]]), radius=0.2)
    grid = rasterize(theta, layout, (16, 16))
    assert grid.shape == (16, 16, 3)
    assert len(np.unique(grid.reshape(-1, 3), axis=0)) == 2
    assert np.allclose(grid[8, 8], theta.particle_normalized)
    assert np.allclose(grid[0, 0], theta.matrix_normalized)
    assert realized_volume_fraction(grid, theta.particle_normalized) == pytest.approx(
        realized_volume_fraction(particle_mask(layout, (16, 16)))
    )


# =============================================================================
# Datasets
# =============================================================================

class TestDataset:
    def test_generated_dataset_is_valid(self, synthetic_catalog):
        dataset = generate_dataset(synthetic_catalog, 4, 2, (16, 16), seed=11)
        assert dataset.grids.shape == (4, 16, 16, 3)
        assert validate_dataset(dataset) == []

    def test_independent_of_worker_count(self, synthetic_catalog):
        serial = generate_dataset(synthetic_catalog, 3, 2, (16, 16), seed=2, workers=1)
        pooled = generate_dataset(synthetic_catalog, 3, 2, (16, 16), seed=2, workers=2)
        assert np.array_equal(serial.grids, pooled.grids)

    def test_storage(self, tmp_path, synthetic_catalog):
        dataset = generate_dataset(synthetic_catalog, 2, 3, (8, 8, 8), seed=4)
        loaded = load_dataset(save_dataset(dataset, tmp_path / "dataset.cgd"))
        assert loaded.shape == (8, 8, 8)
        assert loaded.samples[1].theta == dataset.samples[1].theta
        assert np.allclose(loaded.grids, dataset.grids, atol=1e-6)
        assert validate_dataset(loaded) == []

    def test_validation_flags_tampering(self, synthetic_catalog):
        dataset = generate_dataset(synthetic_catalog, 1, 2, (16, 16), seed=9)
        dataset.grids[0, 0, 0] = [0.9, 0.9, 0.9]
        dataset.grids[0, 0, 1] = [-0.9, 0.1, 0.1]
        assert validate_dataset(dataset)
