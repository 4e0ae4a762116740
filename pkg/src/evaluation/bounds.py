"""
Voigt-Reuss Validation

Checks computed bulk moduli against the analytic two-phase bounds.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import InputValidationError
from ..fem import voigt_reuss_bounds
from ..microstructure import DesignParams

logger = logging.getLogger(__name__)

# Relative slack treating solver round-off as inside the bounds
BOUNDS_TOLERANCE = 1e-8


@dataclass
class BoundsReport:
    """Samples outside [K_lower, K_upper]."""
    count: int
    outside: int
    max_relative_violation: float
    violations: list[dict] = field(default_factory=list)

    @property
    def fraction_outside(self) -> float:
        return self.outside / self.count if self.count else 0.0

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "outside": self.outside,
            "fraction_outside": self.fraction_outside,
            "max_relative_violation": self.max_relative_violation,
            "violations": list(self.violations),
        }


def relative_violation(K: float, lower: float, upper: float) -> float:
    """Distance of K outside [lower, upper] relative to the violated bound (0 inside)."""
    if K < lower:
        return (lower - K) / lower
    if K > upper:
        return (K - upper) / upper
    return 0.0


def bounds_check(
    thetas: Sequence[DesignParams],
    K: Sequence[float],
    dims: int,
    fractions: Optional[Sequence[float]] = None,
) -> BoundsReport:
    """
    Compare moduli against Voigt-Reuss bounds.

    Args:
        thetas: Designs of the samples
        K: Computed moduli, one per design (NaN entries are skipped)
        dims: Spatial dimension (selects the phase modulus formula)
        fractions: Realized particle fractions replacing theta.f_p

    Returns:
        BoundsReport
    """
    if len(thetas) != len(K):
        raise InputValidationError(f"{len(thetas)} designs but {len(K)} moduli")

    outside = 0
    checked = 0
    worst = 0.0
    violations = []
    for index, (theta, value) in enumerate(zip(thetas, K)):
        if not np.isfinite(value):
            continue
        f = theta.f_p if fractions is None else float(fractions[index])
        lower, upper = voigt_reuss_bounds(
            DesignParams(**{**theta.to_dict(), "f_p": f}), dims
        )
        checked += 1
        violation = relative_violation(float(value), lower, upper)
        if violation > BOUNDS_TOLERANCE:
            outside += 1
            worst = max(worst, violation)
            violations.append({
                "index": index,
                "K": float(value),
                "K_lower": lower,
                "K_upper": upper,
                "relative_violation": violation,
            })

    report = BoundsReport(count=checked, outside=outside, max_relative_violation=worst, violations=violations)
    if outside:
        logger.info(f"{outside}/{checked} samples outside the Voigt-Reuss bounds (max {worst:.3%})")
    return report
