"""
Design Parameters

The discrete design space: matrix and particle materials, particle radius and
volume fraction, with sampling and particle-count rules.
"""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..errors import InputValidationError
from ..materials import Catalog, MaterialRecord, normalize, sample_material

# (volume fraction range, diameter range) per spatial dimension
DESIGN_RANGES: dict[int, tuple[tuple[float, float], tuple[float, float]]] = {
    2: ((0.05, 0.5), (0.15, 0.4)),
    3: ((0.05, 0.45), (0.15, 0.35)),
}


def check_dims(dims: int) -> int:
    """Validate a spatial dimension."""
    if dims not in DESIGN_RANGES:
        raise InputValidationError(f"dims must be 2 or 3, got {dims}")
    return dims


@dataclass(frozen=True)
class DesignParams:
    """Design parameters theta (materials in physical units)."""
    E_m: float
    E_p: float
    nu_m: float
    nu_p: float
    rho_m: float
    rho_p: float
    r_p: Optional[float]
    f_p: float

    @classmethod
    def from_materials(
        cls,
        matrix: MaterialRecord,
        particle: MaterialRecord,
        r_p: Optional[float],
        f_p: float,
    ) -> "DesignParams":
        return cls(
            E_m=matrix.E, E_p=particle.E,
            nu_m=matrix.nu, nu_p=particle.nu,
            rho_m=matrix.rho, rho_p=particle.rho,
            r_p=r_p, f_p=f_p,
        )

    @property
    def matrix_vector(self) -> np.ndarray:
        return np.array([self.E_m, self.nu_m, self.rho_m])

    @property
    def particle_vector(self) -> np.ndarray:
        return np.array([self.E_p, self.nu_p, self.rho_p])

    @property
    def matrix_normalized(self) -> np.ndarray:
        return normalize(self.matrix_vector)

    @property
    def particle_normalized(self) -> np.ndarray:
        return normalize(self.particle_vector)

    @property
    def density(self) -> float:
        """Mixture density (1 - f_p) rho_m + f_p rho_p."""
        return (1.0 - self.f_p) * self.rho_m + self.f_p * self.rho_p

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DesignParams":
        return cls(**{key: data[key] for key in cls.__dataclass_fields__})

    def validate(self, dims: int) -> None:
        """
        Check the sampling ranges of a generated design.

        Raises:
            InputValidationError: If f_p or the diameter are out of range
        """
        (f_low, f_high), (d_low, d_high) = DESIGN_RANGES[check_dims(dims)]
        if not f_low <= self.f_p <= f_high:
            raise InputValidationError(f"f_p={self.f_p} outside [{f_low}, {f_high}]")
        if self.r_p is None or not d_low <= 2 * self.r_p <= d_high:
            raise InputValidationError(f"2 r_p={self.r_p} outside [{d_low}, {d_high}]")


def sample_design_params(catalog: Catalog, dims: int, rng: np.random.Generator) -> DesignParams:
    """
    Sample theta: two chunk-balanced materials, uniform f_p and diameter.

    Args:
        catalog: Material catalog
        dims: 2 or 3
        rng: Random generator

    Returns:
        Sampled DesignParams
    """
    (f_low, f_high), (d_low, d_high) = DESIGN_RANGES[check_dims(dims)]
    matrix = sample_material(catalog, rng)
    particle = sample_material(catalog, rng)
    f_p = float(rng.uniform(f_low, f_high))
    diameter = float(rng.uniform(d_low, d_high))
    return DesignParams.from_materials(matrix, particle, r_p=diameter / 2.0, f_p=f_p)


def particle_volume(r_p: float, dims: int) -> float:
    """Area of a circle (2D) or volume of a sphere (3D) of radius r_p."""
    if check_dims(dims) == 2:
        return math.pi * r_p ** 2
    return 4.0 / 3.0 * math.pi * r_p ** 3


def particle_count(f_p: float, r_p: float, dims: int) -> tuple[float, int]:
    """
    Number of particles realizing a volume fraction.

    Args:
        f_p: Volume fraction
        r_p: Particle radius (unit-domain fraction)
        dims: 2 or 3

    Returns:
        Tuple of (real count, count rounded half-to-even)
    """
    if r_p <= 0:
        raise InputValidationError(f"Particle radius must be positive, got {r_p}")
    real = f_p / particle_volume(r_p, dims)
    return real, int(round(real))


def stochastic_round(count: float, rng: np.random.Generator) -> int:
    """
    Unbiased random rounding: ceil with probability frac(count), else floor.

    Args:
        count: Non-negative real count
        rng: Random generator

    Returns:
        Integer count with expectation equal to ``count``
    """
    if count < 0:
        raise InputValidationError(f"Count must be non-negative, got {count}")
    floor = math.floor(count)
    return floor + int(rng.random() < count - floor)
