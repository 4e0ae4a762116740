"""
Design Objectives

J1 = (K - K*)^2 targets a bulk modulus; J2 adds a weighted mean density.
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..materials import denormalize


class ObjectiveSpec(BaseModel):
    """Objective definition."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kind: Literal["J1", "J2"] = Field(default="J1", description="J1: modulus only, J2: modulus plus density")
    K_star: float = Field(gt=0, description="Target bulk modulus (GPa)")
    lam: float = Field(default=0.0, ge=0, alias="lambda", description="Density weight of J2")

    @property
    def density_weight(self) -> float:
        return self.lam if self.kind == "J2" else 0.0


def mean_density(grid: np.ndarray) -> float:
    """Element mean of the denormalized density channel."""
    return float(denormalize(np.asarray(grid, dtype=np.float64))[..., 2].mean())


def objective(spec: ObjectiveSpec, K: float, grid: np.ndarray) -> float:
    """
    Evaluate the objective for a computed bulk modulus.

    Args:
        spec: Objective definition
        K: Bulk modulus of the grid (GPa)
        grid: Normalized grid (density term of J2)

    Returns:
        Scalar objective value
    """
    value = (K - spec.K_star) ** 2
    if spec.density_weight:
        value += spec.density_weight * mean_density(grid)
    return float(value)
