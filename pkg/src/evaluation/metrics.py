"""
Error Metrics

Fraction of designs within an error margin and the material-chunk coverage
of those designs.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from ..errors import InputValidationError
from ..materials import Catalog
from .design_eval import EvalResult

logger = logging.getLogger(__name__)

MarginKind = Literal["relative", "absolute"]

RELATIVE_MARGINS = (0.01, 0.05)
ABSOLUTE_MARGINS = (1.0, 5.0, 10.0)


def _error(result: EvalResult, kind: MarginKind) -> float:
    if kind == "relative":
        return result.eps_r
    if kind == "absolute":
        return result.eps
    raise InputValidationError(f"Unknown margin kind '{kind}'")


def within_margin(results: Sequence[EvalResult], kind: MarginKind, margin: float) -> list[EvalResult]:
    """Results whose error is strictly below the margin."""
    return [result for result in results if _error(result, kind) < margin]


def frac_metric(results: Sequence[EvalResult], kind: MarginKind, margin: float) -> float:
    """
    Fraction of results with error below a margin.

    Args:
        results: Evaluation results
        kind: "relative" compares eps_r, "absolute" compares eps (GPa)
        margin: Margin (may be inf)

    Returns:
        Fraction in [0, 1]

    Raises:
        InputValidationError: If results is empty
    """
    if not results:
        raise InputValidationError("frac is undefined for an empty result list")
    return len(within_margin(results, kind, margin)) / len(results)


def cov_metric(qualifying: Sequence[EvalResult], catalog: Catalog) -> float:
    """
    Share of the catalog's nonempty chunks hit by qualifying designs.

    Matrix and particle materials are counted into one set of chunks.

    Args:
        qualifying: Results already within the margin
        catalog: Catalog defining the nonempty chunks

    Returns:
        Coverage in [0, 1]
    """
    total = len(catalog.nonempty_chunks)
    if total == 0 or not qualifying:
        return 0.0
    chunks = {chunk for result in qualifying for chunk in result.chunk_ids}
    return len(chunks) / total


@dataclass
class MetricReport:
    """frac and cov per margin."""
    count: int
    frac: dict[str, float] = field(default_factory=dict)
    cov: dict[str, float] = field(default_factory=dict)
    mean_eps_r: Optional[float] = None
    mean_eps: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "frac": dict(self.frac),
            "cov": dict(self.cov),
            "mean_eps_r": self.mean_eps_r,
            "mean_eps": self.mean_eps,
        }


def margin_key(kind: MarginKind, margin: float) -> str:
    if kind == "relative":
        return f"eps_r<{margin:g}"
    return f"eps<{margin:g}"


def metric_report(
    results: Sequence[EvalResult],
    catalog: Catalog,
    relative: Sequence[float] = RELATIVE_MARGINS,
    absolute: Sequence[float] = ABSOLUTE_MARGINS,
) -> MetricReport:
    """frac and cov for every relative and absolute margin."""
    report = MetricReport(count=len(results))
    if not results:
        logger.warning("No evaluation results; metrics are empty")
        return report
    margins = [("relative", m) for m in relative] + [("absolute", m) for m in absolute]
    for kind, margin in margins:
        key = margin_key(kind, margin)
        report.frac[key] = frac_metric(results, kind, margin)
        report.cov[key] = cov_metric(within_margin(results, kind, margin), catalog)
    report.mean_eps_r = float(np.mean([r.eps_r for r in results]))
    report.mean_eps = float(np.mean([r.eps for r in results]))
    return report
