"""Tests for objectives and adjoint gradients."""

import numpy as np
import pytest

from src.fem import homogenize
from src.materials import NORMALIZED_SCALE, normalize
from src.microstructure import compose_grid
from src.sensitivity import (
    ObjectiveSpec,
    adjoint_gradient,
    evaluate_objective,
    finite_difference_gradient,
    gradient_check,
    mean_density,
    objective,
)


class TestObjective:
    def test_j1(self, two_phase_grid):
        spec = ObjectiveSpec(K_star=40.0)
        assert objective(spec, 43.0, two_phase_grid) == pytest.approx(9.0)

    def test_j2_adds_density(self, two_phase_grid):
        spec = ObjectiveSpec(kind="J2", K_star=40.0, lam=2.0)
        expected = 9.0 + 2.0 * (0.75 * 1.2 + 0.25 * 2.7)
        assert mean_density(two_phase_grid) == pytest.approx(0.75 * 1.2 + 0.25 * 2.7)
        assert objective(spec, 43.0, two_phase_grid) == pytest.approx(expected)

    def test_lambda_alias(self):
        spec = ObjectiveSpec.model_validate({"kind": "J2", "K_star": 10.0, "lambda": 0.5})
        assert spec.density_weight == 0.5
        assert ObjectiveSpec(K_star=10.0, lam=0.5).density_weight == 0.0


# =============================================================================
# Adjoint gradient
# =============================================================================

class TestAdjoint:
    def test_matches_finite_differences(self, two_phase_grid):
        report = gradient_check(two_phase_grid, ObjectiveSpec(K_star=50.0))
        assert report.passed
        assert report.max_rel_error <= 1e-4
        assert report.n_components == 16 * 3

    def test_j2_on_a_volume(self):
        rng = np.random.default_rng(3)
        grid = rng.uniform(-0.8, 0.6, size=(2, 2, 2, 3))
        spec = ObjectiveSpec(kind="J2", K_star=30.0, lam=4.0)
        report = gradient_check(grid, spec, elements=[0, 5])
        assert report.passed
        assert report.n_components == 6

    @pytest.mark.slow
    def test_full_volume_matches_finite_differences(self):
        mask = np.random.default_rng(4).random((4, 4, 4)) < 0.4
        grid = compose_grid(mask, normalize([20.0, 0.3, 1.5]), normalize([200.0, 0.22, 5.0]))
        report = gradient_check(grid, ObjectiveSpec(K_star=30.0))
        assert report.passed
        assert report.max_rel_error <= 1e-4
        assert report.n_components == 64 * 3

    def test_directional_error_is_second_order(self, two_phase_grid):
        spec = ObjectiveSpec(K_star=50.0)
        direction = np.random.default_rng(5).uniform(-0.5, 0.5, size=two_phase_grid.shape)
        exact = float(np.sum(adjoint_gradient(two_phase_grid, spec, method="direct").values * direction))

        errors = []
        for h in (1e-2, 5e-3, 2.5e-3):
            plus = evaluate_objective(two_phase_grid + h * direction, spec)
            minus = evaluate_objective(two_phase_grid - h * direction, spec)
            errors.append(abs((plus - minus) / (2.0 * h) - exact))

        ratios = [errors[0] / errors[1], errors[1] / errors[2]]
        assert all(3.0 < ratio < 5.0 for ratio in ratios)

    def test_density_channel_is_constant(self, two_phase_grid):
        spec = ObjectiveSpec(kind="J2", K_star=50.0, lam=3.0)
        gradient = adjoint_gradient(two_phase_grid, spec)
        assert np.allclose(gradient.rho, 3.0 / 16 * NORMALIZED_SCALE[2])

    def test_zero_residual_gives_zero_modulus_gradient(self, two_phase_grid):
        K = homogenize(two_phase_grid, method="direct").K
        gradient = adjoint_gradient(two_phase_grid, ObjectiveSpec(K_star=K), method="direct")
        assert gradient.J == pytest.approx(0.0, abs=1e-20)
        assert np.allclose(gradient.E, 0.0) and np.allclose(gradient.nu, 0.0)

    def test_physical_units(self, two_phase_grid):
        spec = ObjectiveSpec(K_star=50.0)
        normalized = adjoint_gradient(two_phase_grid, spec, normalized=True).values
        physical = adjoint_gradient(two_phase_grid, spec, normalized=False).values
        assert np.allclose(normalized, physical * NORMALIZED_SCALE)

    def test_stiffer_elements_raise_modulus(self, two_phase_grid):
        # K below a high target: increasing any E lowers J
        gradient = adjoint_gradient(two_phase_grid, ObjectiveSpec(K_star=400.0))
        assert gradient.K < 400.0
        assert np.all(gradient.E < 0.0)


def test_finite_difference_probes_subset(two_phase_grid):
    reference = finite_difference_gradient(two_phase_grid, ObjectiveSpec(K_star=50.0), elements=[2], channels=[0])
    flat = reference.reshape(-1, 3)
    assert np.isfinite(flat[2, 0])
    assert np.isnan(flat[0]).all()
