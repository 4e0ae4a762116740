"""Tests for target selection, design evaluation, metrics and reports."""

import csv
import json

import numpy as np
import pytest

from src.config import get_settings
from src.errors import EvaluationError, InputValidationError
from src.evaluation import (
    EvalResult,
    bounds_check,
    compute_moduli,
    cov_metric,
    design_chunk_ids,
    evaluate_design,
    evaluate_designs,
    frac_metric,
    k_gap_profile,
    margin_key,
    metric_report,
    plot_histogram,
    relative_violation,
    result_row,
    sample_microstructure,
    select_targets,
    write_json,
    write_results_csv,
)
from src.fem import homogenize
from src.materials import generate_synthetic_catalog
from src.microstructure import DesignParams


def homogeneous_design(r_p=0.1, f_p=0.1) -> DesignParams:
    return DesignParams(E_m=100.0, E_p=100.0, nu_m=0.25, nu_p=0.25, rho_m=2.0, rho_p=2.0, r_p=r_p, f_p=f_p)


def result_with_error(relative: float, K_star: float = 100.0, chunks=(0, 1)) -> EvalResult:
    return EvalResult(
        theta_hat=homogeneous_design(),
        K_theta=K_star * (1.0 + relative),
        K_star=K_star,
        chunk_ids=chunks,
    )


@pytest.fixture
def quick_packing(monkeypatch):
    monkeypatch.setenv("COMPDIFF_PACKING_MAX_RESTARTS", "1")
    monkeypatch.setenv("COMPDIFF_PACKING_MAX_UPDATES", "20")
    get_settings.cache_clear()


# =============================================================================
# Targets
# =============================================================================

class TestTargets:
    def test_percentile_targets(self):
        K = np.arange(101, dtype=np.float64)
        targets = select_targets(K, count=5)
        assert np.allclose(targets, [1.0, 25.5, 50.0, 74.5, 99.0])

    def test_nan_ignored(self):
        K = np.concatenate([np.arange(101, dtype=np.float64), [np.nan]])
        assert np.allclose(select_targets(K, count=2), [1.0, 99.0])

    def test_small_sample_warns(self, caplog):
        select_targets(np.arange(10, dtype=np.float64))
        assert "unstable" in caplog.text

    def test_no_finite_moduli(self):
        with pytest.raises(InputValidationError):
            select_targets(np.array([np.nan, np.nan]))

    def test_gap_profile(self):
        profile = k_gap_profile(np.arange(11, dtype=np.float64), bins=2)
        assert np.allclose(profile.edges, [0.0, 5.0, 10.0])
        assert profile.counts.tolist() == [5, 6]
        assert np.allclose(profile.mean_gap, [1.0, 1.0])

    def test_gap_profile_empty_bin(self):
        profile = k_gap_profile(np.array([0.0, 1.0, 10.0]), bins=3)
        assert np.isnan(profile.mean_gap[1])
        assert profile.to_dict()["mean_gap"][1] is None

    def test_gap_profile_needs_two(self):
        with pytest.raises(InputValidationError):
            k_gap_profile(np.array([1.0]))

    def test_compute_moduli(self, uniform_grid):
        grids = np.stack([uniform_grid((4, 4), 100.0, 0.25), uniform_grid((4, 4), 50.0, 0.25)])
        K = compute_moduli(grids)
        assert np.allclose(K, [100.0 / 1.5, 50.0 / 1.5], rtol=1e-6)

    def test_failed_solve_is_nan(self, uniform_grid):
        good = uniform_grid((4, 4), 100.0, 0.25)
        bad = good.copy()
        bad[..., 0] = -5.0
        K = compute_moduli(np.stack([good, bad]))
        assert np.isfinite(K[0])
        assert np.isnan(K[1])


# =============================================================================
# Design evaluation
# =============================================================================

class TestEvaluateDesign:
    def test_homogeneous_design(self):
        result = evaluate_design(homogeneous_design(), 100.0 / 1.5, 2, np.random.default_rng(0), (8, 8))
        assert result.reliable
        assert len(result.K_values) == 2
        assert result.eps_r == pytest.approx(0.0, abs=1e-6)
        assert result.chunk_ids == design_chunk_ids(homogeneous_design())

    def test_empty_layout(self):
        grid = sample_microstructure(homogeneous_design(r_p=None, f_p=0.0), (6, 6), np.random.default_rng(0))
        assert grid.shape == (6, 6, 3)
        assert np.allclose(grid, grid[0, 0])

    def test_all_repeats_fail(self, quick_packing):
        design = homogeneous_design(r_p=0.3, f_p=0.95)
        with pytest.raises(EvaluationError):
            evaluate_design(design, 50.0, 2, np.random.default_rng(0), (8, 8))

    def test_batch_marks_failures(self, quick_packing):
        designs = [homogeneous_design(), homogeneous_design(r_p=0.3, f_p=0.95)]
        results = evaluate_designs(designs, 60.0, 1, seed=0, shape=(8, 8), labels=["ok", "bad"])
        assert results[0] is not None and results[0].label == "ok"
        assert results[1] is None

    def test_batch_reproducible(self):
        designs = [homogeneous_design(f_p=0.2)]
        first = evaluate_designs(designs, 60.0, 2, seed=4, shape=(8, 8))
        second = evaluate_designs(designs, 60.0, 2, seed=4, shape=(8, 8))
        assert first[0].K_values == second[0].K_values

    def test_invalid_inputs(self):
        rng = np.random.default_rng(0)
        with pytest.raises(InputValidationError):
            evaluate_design(homogeneous_design(), 60.0, 0, rng, (8, 8))
        with pytest.raises(InputValidationError):
            evaluate_design(homogeneous_design(), -1.0, 1, rng, (8, 8))

    def test_retarget(self):
        result = result_with_error(0.1)
        other = result.with_target(110.0)
        assert other.eps == pytest.approx(0.0)
        assert result.K_star == 100.0


# =============================================================================
# Metrics
# =============================================================================

class TestMetrics:
    def test_frac_is_strict(self):
        results = [result_with_error(e) for e in (0.005, 0.02, 0.08)]
        assert frac_metric(results, "relative", 0.01) == pytest.approx(1 / 3)
        assert frac_metric(results, "relative", 0.08) == pytest.approx(2 / 3)
        assert frac_metric(results, "relative", float("inf")) == 1.0

    def test_frac_absolute(self):
        results = [result_with_error(e) for e in (0.005, 0.02, 0.08)]
        assert frac_metric(results, "absolute", 1.0) == pytest.approx(1 / 3)
        assert frac_metric(results, "absolute", 5.0) == pytest.approx(2 / 3)

    def test_frac_empty(self):
        with pytest.raises(InputValidationError):
            frac_metric([], "relative", 0.01)

    def test_unknown_kind(self):
        with pytest.raises(InputValidationError):
            frac_metric([result_with_error(0.0)], "squared", 0.01)

    def test_cov_half_of_chunks(self):
        catalog = generate_synthetic_catalog(seed=0)
        assert len(catalog.nonempty_chunks) == 168
        qualifying = [result_with_error(0.0, chunks=(2 * k, 2 * k + 1)) for k in range(42)]
        assert cov_metric(qualifying, catalog) == pytest.approx(0.5)

    def test_cov_counts_shared_chunks_once(self, synthetic_catalog):
        qualifying = [result_with_error(0.0, chunks=(5, 5)), result_with_error(0.0, chunks=(5, 6))]
        assert cov_metric(qualifying, synthetic_catalog) == pytest.approx(2 / 30)
        assert cov_metric([], synthetic_catalog) == 0.0

    def test_margin_keys(self):
        assert margin_key("relative", 0.01) == "eps_r<0.01"
        assert margin_key("absolute", 5.0) == "eps<5"

    def test_report(self, synthetic_catalog):
        results = [result_with_error(e) for e in (0.005, 0.02, 0.08)]
        report = metric_report(results, synthetic_catalog)
        assert report.count == 3
        assert set(report.frac) == {"eps_r<0.01", "eps_r<0.05", "eps<1", "eps<5", "eps<10"}
        assert report.frac["eps<10"] == 1.0
        assert report.mean_eps_r == pytest.approx(0.035)
        assert metric_report([], synthetic_catalog).frac == {}


# =============================================================================
# Bounds
# =============================================================================

class TestBounds:
    def test_relative_violation(self):
        assert relative_violation(5.0, 4.0, 6.0) == 0.0
        assert relative_violation(3.0, 4.0, 6.0) == pytest.approx(0.25)
        assert relative_violation(9.0, 4.0, 6.0) == pytest.approx(0.5)

    def test_fem_within_bounds(self, two_phase_grid):
        design = DesignParams(E_m=15.0, E_p=150.0, nu_m=0.25, nu_p=0.25, rho_m=1.2, rho_p=2.7, r_p=0.25, f_p=0.3)
        K = homogenize(two_phase_grid).K
        report = bounds_check([design], [K], dims=2, fractions=[0.25])
        assert report.count == 1
        assert report.outside == 0

    def test_violations_reported(self):
        design = DesignParams(E_m=15.0, E_p=150.0, nu_m=0.25, nu_p=0.25, rho_m=1.2, rho_p=2.7, r_p=0.1, f_p=0.3)
        report = bounds_check([design, design, design], [1.0, np.nan, 500.0], dims=3)
        assert report.count == 2
        assert report.outside == 2
        assert report.fraction_outside == 1.0
        assert [v["index"] for v in report.violations] == [0, 2]

    def test_length_mismatch(self):
        with pytest.raises(InputValidationError):
            bounds_check([homogeneous_design()], [1.0, 2.0], dims=3)


# =============================================================================
# Reports
# =============================================================================

class TestReports:
    def test_results_csv(self, tmp_path):
        result = result_with_error(0.02)
        result.label = 7
        path = write_results_csv([result_row(result, K_s=101.0, V_m=0.0, d_m=0.01)], tmp_path / "results.csv")
        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 1
        assert rows[0]["label"] == "7"
        assert float(rows[0]["eps_r"]) == pytest.approx(0.02)
        assert rows[0]["reliable"] == "True"

    def test_json(self, tmp_path):
        path = write_json({"b": np.float64(1.5), "a": np.arange(2)}, tmp_path / "out.json")
        data = json.loads(path.read_text())
        assert data == {"a": [0, 1], "b": 1.5}
        assert path.read_text().index('"a"') < path.read_text().index('"b"')

    def test_histogram_is_deterministic(self, tmp_path):
        values = [1.0, 2.0, 2.5, np.nan, 3.0]
        first = plot_histogram(values, tmp_path / "a.svg", "K", markers=[2.0])
        second = plot_histogram(values, tmp_path / "b.svg", "K", markers=[2.0])
        assert first.read_text().startswith("<?xml")
        assert first.read_bytes() == second.read_bytes()
