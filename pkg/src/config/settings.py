"""
Settings Configuration

Pydantic-based settings for composite-guided-diffusion. Every field can be
overridden through a ``COMPDIFF_``-prefixed environment variable or a
``.env`` file.
"""

from functools import lru_cache
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="COMPDIFF_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Logging settings
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG/INFO/WARNING/ERROR)"
    )

    # Parallelism
    workers: int = Field(
        default=0,
        ge=0,
        description="Worker processes for parallel axes (0 = all available cores)"
    )

    # FEM settings
    fem_solver: Literal["cg", "direct", "auto"] = Field(
        default="cg",
        description="Linear solver: Jacobi-preconditioned CG, sparse LU, or auto"
    )
    fem_tolerance: float = Field(
        default=1e-10,
        gt=0,
        description="Relative residual tolerance of the CG solver"
    )
    fem_max_iter_factor: int = Field(
        default=20,
        gt=0,
        description="CG iteration cap as a multiple of the free DOF count"
    )
    fem_auto_direct_limit: int = Field(
        default=60_000,
        gt=0,
        description="Largest free DOF count solved directly when fem_solver=auto"
    )
    fem_strain: float = Field(
        default=1e-3,
        gt=0,
        description="Magnitude of the prescribed hydrostatic strain"
    )
    fem_nu_ceiling: float = Field(
        default=0.499,
        gt=0,
        lt=0.5,
        description="Upper guard on Poisson ratio for relaxed grids"
    )
    fem_debug_dump_dir: Optional[str] = Field(
        default=None,
        description="If set, stiffness matrices are dumped here in matrix-market format"
    )

    # Packing settings
    packing_max_restarts: int = Field(
        default=50,
        gt=0,
        description="Fresh initial placements before packing is declared infeasible"
    )
    packing_max_updates: int = Field(
        default=10_000,
        gt=0,
        description="Penetration-resolving updates per placement"
    )
    packing_jitter: float = Field(
        default=0.01,
        ge=0,
        description="Jitter half-width as a fraction of the particle radius"
    )
    dataset_max_resamples: int = Field(
        default=20,
        gt=0,
        description="Design resamples per dataset item when packing is infeasible"
    )

    # Diffusion settings
    diffusion_steps: int = Field(
        default=1000,
        gt=0,
        description="Number of training timesteps T"
    )
    beta_start: float = Field(
        default=1e-5,
        gt=0,
        lt=1,
        description="First beta of the linear schedule"
    )
    beta_end: float = Field(
        default=1e-2,
        gt=0,
        lt=1,
        description="Last beta of the linear schedule"
    )
    rescale_betas: bool = Field(
        default=True,
        description="Rescale the schedule to zero terminal SNR"
    )
    guidance_min_alpha_bar: float = Field(
        default=1e-2,
        gt=0,
        le=1,
        description="Floor on alpha_bar in the direct guidance approximation"
    )

    # Backprojection settings
    gmm_restarts: int = Field(
        default=5,
        gt=0,
        description="Deterministic restarts of the material mixture fit"
    )
    gmm_max_iter: int = Field(
        default=200,
        gt=0,
        description="EM iteration cap"
    )
    gmm_tolerance: float = Field(
        default=1e-6,
        gt=0,
        description="EM log-likelihood tolerance"
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
