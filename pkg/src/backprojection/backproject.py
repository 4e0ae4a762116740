"""
Backprojection

Maps a generated relaxed grid to discrete design parameters: fitted
materials snapped to the catalog, detected radius and volume fraction.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np

from ..materials import Catalog, MaterialRecord, denormalize, nearest_material
from ..microstructure import DesignParams, grid_dims
from ..parallel import parallel_map
from .detection import ParticleDetection, detect_particles
from .mixture import MaterialFit, fit_material_gmm

logger = logging.getLogger(__name__)


@dataclass
class Backprojection:
    """Design recovered from a grid."""
    theta_hat: DesignParams
    raw_theta: DesignParams
    V_m: float
    d_m: float
    matrix_id: int
    particle_id: int
    fit: MaterialFit = field(repr=False)
    detection: ParticleDetection = field(repr=False)

    @property
    def rejected(self) -> bool:
        return self.detection.rejected

    @property
    def single_material(self) -> bool:
        return self.fit.single_material

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.to_dict(),
            "raw_theta": self.raw_theta.to_dict(),
            "V_m": self.V_m,
            "d_m": self.d_m,
            "matrix_id": self.matrix_id,
            "particle_id": self.particle_id,
            "single_material": self.single_material,
            "detection": self.detection.to_dict(),
        }


def _design(matrix: np.ndarray, particle: np.ndarray, r_p: Optional[float], f_p: float) -> DesignParams:
    return DesignParams(
        E_m=float(matrix[0]), E_p=float(particle[0]),
        nu_m=float(matrix[1]), nu_p=float(particle[1]),
        rho_m=float(matrix[2]), rho_p=float(particle[2]),
        r_p=r_p, f_p=f_p,
    )


def _record_design(matrix: MaterialRecord, particle: MaterialRecord, r_p: Optional[float], f_p: float) -> DesignParams:
    return DesignParams.from_materials(matrix, particle, r_p=r_p, f_p=f_p)


def backproject(grid: np.ndarray, catalog: Catalog, seed: int = 0) -> Backprojection:
    """
    Recover design parameters from a grid.

    The matrix is the component that is not the particle foreground. When
    the grid holds one material or detection fails, f_p is 0 and r_p is
    absent; a failed detection is flagged, not raised.

    Args:
        grid: Normalized grid of shape (*shape, 3)
        catalog: Material catalog for the nearest-material lookup
        seed: Seed of the mixture fit

    Returns:
        Backprojection
    """
    grid = np.asarray(grid, dtype=np.float64)
    dims = grid_dims(grid)
    fit = fit_material_gmm(grid, seed=seed)

    if fit.single_material:
        detection = ParticleDetection(
            foreground_label=None,
            centers=np.zeros((0, dims)),
            radii=np.zeros(0),
            r_p_hat=None,
            f_p_hat=0.0,
            side=grid.shape[0],
            reasons=["single material"],
        )
        matrix_label = particle_label = 0
    else:
        detection = detect_particles(fit.assignment)
        if detection.foreground_label is None:
            matrix_label = int(np.argmax(fit.counts))
            particle_label = 1 - matrix_label
        else:
            particle_label = detection.foreground_label
            matrix_label = 1 - particle_label

    f_p = 0.0 if detection.rejected else detection.f_p_hat
    r_p = None if detection.rejected else detection.r_p_hat

    matrix, matrix_distance = nearest_material(catalog, fit.means[matrix_label])
    particle, particle_distance = nearest_material(catalog, fit.means[particle_label])

    return Backprojection(
        theta_hat=_record_design(matrix, particle, r_p, f_p),
        raw_theta=_design(
            denormalize(fit.means[matrix_label]),
            denormalize(fit.means[particle_label]),
            r_p,
            f_p,
        ),
        V_m=fit.V_m,
        d_m=matrix_distance + particle_distance,
        matrix_id=matrix.id,
        particle_id=particle.id,
        fit=fit,
        detection=detection,
    )


def _backproject_one(grid: np.ndarray, catalog: Catalog, seed: int) -> Backprojection:
    return backproject(grid, catalog, seed=seed)


def backproject_batch(
    grids: np.ndarray,
    catalog: Catalog,
    seed: int = 0,
    workers: Optional[int] = None,
) -> list[Backprojection]:
    """Backproject every grid of a stack (parallel across grids)."""
    results = parallel_map(partial(_backproject_one, catalog=catalog, seed=seed), list(grids), workers)
    rejected = sum(result.rejected for result in results)
    if rejected:
        logger.warning(f"Particle detection failed for {rejected}/{len(results)} grids")
    return results


def save_backprojections(results: list[Backprojection], path: Path | str, labels: Optional[list] = None) -> Path:
    """
    Write a JSON report of backprojections.

    Args:
        results: Backprojections
        path: Destination file
        labels: Optional per-result identifiers (e.g. sample seeds)

    Returns:
        The path written
    """
    entries = []
    for index, result in enumerate(results):
        entry = result.to_dict()
        entry["label"] = labels[index] if labels is not None else index
        entries.append(entry)
    report = {
        "count": len(results),
        "rejected": sum(result.rejected for result in results),
        "mean_V_m": float(np.mean([r.V_m for r in results])) if results else None,
        "mean_d_m": float(np.mean([r.d_m for r in results])) if results else None,
        "results": entries,
    }
    path = Path(path)
    path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(results)} backprojections to {path}")
    return path
