"""
Guidance Configuration
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..sensitivity import ObjectiveSpec

GuidanceMode = Literal["full-vjp", "direct"]


class GuidanceConfig(BaseModel):
    """Loss-guided DDIM sampling settings."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    objective: ObjectiveSpec = Field(description="Objective evaluated at the predicted clean sample")
    rho_D: float = Field(default=1.0, ge=0, description="Guidance step size (0 = unguided)")
    scale_E: float = Field(default=0.5, ge=0, description="Scale of the E-channel FEM gradient")
    scale_nu: float = Field(default=0.02, ge=0, description="Scale of the nu-channel FEM gradient")
    scale_rho: float = Field(default=1.0, ge=0, description="Scale of the rho-channel FEM gradient")
    N: int = Field(default=100, ge=1, description="Sampling steps")
    eta: float = Field(default=1.0, ge=0, description="DDIM noise scale")
    mode: GuidanceMode = Field(default="full-vjp", description="Pull-back through the network or its explicit term")
    project_materials: bool = Field(default=False, description="Snap x0_hat elements to catalog materials")

    @property
    def channel_scales(self) -> np.ndarray:
        return np.array([self.scale_E, self.scale_nu, self.scale_rho])

    @property
    def guided(self) -> bool:
        return self.rho_D > 0.0

    def unguided(self) -> "GuidanceConfig":
        """Same settings with the guidance term switched off."""
        return self.model_copy(update={"rho_D": 0.0})
