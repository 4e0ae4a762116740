"""
Material Mixture Fit

Two-component spherical Gaussian mixture over the element material vectors
of a generated grid.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.mixture import GaussianMixture

from ..config import get_settings
from ..errors import InputValidationError

logger = logging.getLogger(__name__)

# Means closer than this (normalized units) describe one material
SINGLE_MATERIAL_DISTANCE = 0.02
REG_COVAR = 1e-12
# Variances below this after removing REG_COVAR are reported as exactly 0
_VARIANCE_SNAP = 1e-12


@dataclass
class MaterialFit:
    """Fitted materials of a grid."""
    means: np.ndarray
    variances: np.ndarray
    V_m: float
    assignment: np.ndarray = field(repr=False)
    single_material: bool = False

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.assignment.ravel().astype(np.int64), minlength=2)


def _single_fit(elements: np.ndarray, shape: tuple[int, ...]) -> MaterialFit:
    mean = elements.mean(axis=0)
    variance = float(np.mean((elements - mean) ** 2))
    variance = 0.0 if variance < _VARIANCE_SNAP else variance
    return MaterialFit(
        means=np.stack([mean, mean]),
        variances=np.array([variance, variance]),
        V_m=variance,
        assignment=np.zeros(shape, dtype=np.int8),
        single_material=True,
    )


def fit_material_gmm(grid: np.ndarray, seed: int = 0) -> MaterialFit:
    """
    Fit two spherical Gaussians to the element materials.

    EM uses k-means++ seeding and the restart count, iteration cap and
    tolerance from the settings. Each element is assigned to its nearest
    fitted mean.

    Args:
        grid: Normalized grid of shape (*shape, 3)
        seed: Seed of the deterministic restarts

    Returns:
        MaterialFit
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim not in (3, 4) or grid.shape[-1] != 3:
        raise InputValidationError(f"Expected a (*shape, 3) grid, got {grid.shape}")
    shape = grid.shape[:-1]
    elements = grid.reshape(-1, 3)

    if len(np.unique(elements, axis=0)) < 2:
        return _single_fit(elements, shape)

    settings = get_settings()
    mixture = GaussianMixture(
        n_components=2,
        covariance_type="spherical",
        n_init=settings.gmm_restarts,
        max_iter=settings.gmm_max_iter,
        tol=settings.gmm_tolerance,
        reg_covar=REG_COVAR,
        init_params="k-means++",
        random_state=seed,
    )
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            mixture.fit(elements)
    except ValueError as e:
        logger.debug(f"Mixture fit collapsed ({e}); treating grid as one material")
        return _single_fit(elements, shape)

    if not mixture.converged_:
        logger.debug(f"Mixture fit stopped after {mixture.n_iter_} iterations without converging")

    means = mixture.means_
    if np.any(mixture.weights_ <= 0.0) or np.linalg.norm(means[0] - means[1]) < SINGLE_MATERIAL_DISTANCE:
        return _single_fit(elements, shape)

    variances = np.maximum(mixture.covariances_ - REG_COVAR, 0.0)
    variances[variances < _VARIANCE_SNAP] = 0.0

    distances = np.linalg.norm(elements[:, None, :] - means[None, :, :], axis=-1)
    assignment = np.argmin(distances, axis=1).astype(np.int8).reshape(shape)

    return MaterialFit(
        means=means.copy(),
        variances=variances,
        V_m=float(variances.sum()),
        assignment=assignment,
        single_material=False,
    )
