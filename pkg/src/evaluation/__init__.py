"""
Evaluation Module

Target selection, K_theta estimation by microstructure resampling, frac and
cov metrics, Voigt-Reuss validation and report emission.
"""

from .bounds import BOUNDS_TOLERANCE, BoundsReport, bounds_check, relative_violation

from .design_eval import (
    DEFAULT_REPEATS,
    EvalResult,
    design_chunk_ids,
    evaluate_design,
    evaluate_designs,
    sample_microstructure,
)

from .metrics import (
    ABSOLUTE_MARGINS,
    RELATIVE_MARGINS,
    MarginKind,
    MetricReport,
    cov_metric,
    frac_metric,
    margin_key,
    metric_report,
    within_margin,
)

from .report import (
    CSV_COLUMNS,
    plot_histogram,
    result_row,
    write_json,
    write_results_csv,
)

from .targets import (
    MIN_STABLE_SAMPLES,
    GapProfile,
    compute_moduli,
    k_gap_profile,
    select_targets,
)

__all__ = [
    # Targets
    "MIN_STABLE_SAMPLES",
    "GapProfile",
    "compute_moduli",
    "k_gap_profile",
    "select_targets",
    # Design evaluation
    "DEFAULT_REPEATS",
    "EvalResult",
    "design_chunk_ids",
    "evaluate_design",
    "evaluate_designs",
    "sample_microstructure",
    # Metrics
    "ABSOLUTE_MARGINS",
    "RELATIVE_MARGINS",
    "MarginKind",
    "MetricReport",
    "cov_metric",
    "frac_metric",
    "margin_key",
    "metric_report",
    "within_margin",
    # Bounds
    "BOUNDS_TOLERANCE",
    "BoundsReport",
    "bounds_check",
    "relative_violation",
    # Reports
    "CSV_COLUMNS",
    "plot_histogram",
    "result_row",
    "write_json",
    "write_results_csv",
]
