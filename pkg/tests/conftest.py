"""
Shared fixtures.

Settings are cached process-wide; every test runs serially (one worker)
with a fresh settings instance so environment overrides take effect.
"""

import numpy as np
import pytest

from src.config import get_settings
from src.materials import Catalog, MaterialRecord, generate_synthetic_catalog, normalize
from src.microstructure import compose_grid


@pytest.fixture(autouse=True)
def serial_settings(monkeypatch):
    monkeypatch.setenv("COMPDIFF_WORKERS", "1")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def small_catalog() -> Catalog:
    """Four hand-picked materials in distinct chunks."""
    return Catalog([
        MaterialRecord(id=1, E=15.0, nu=0.25, rho=1.2),
        MaterialRecord(id=2, E=150.0, nu=0.25, rho=2.7),
        MaterialRecord(id=3, E=70.0, nu=0.33, rho=2.7),
        MaterialRecord(id=4, E=210.0, nu=0.30, rho=7.8),
    ])


@pytest.fixture
def synthetic_catalog() -> Catalog:
    return generate_synthetic_catalog(seed=7, n=60, nonempty_chunks=30)


@pytest.fixture
def two_phase_grid():
    """4x4 grid, soft matrix with a stiff 2x2 inclusion."""
    mask = np.zeros((4, 4), dtype=bool)
    mask[1:3, 1:3] = True
    matrix = normalize([15.0, 0.25, 1.2])
    particle = normalize([150.0, 0.25, 2.7])
    return compose_grid(mask, matrix, particle)


@pytest.fixture
def uniform_grid():
    """Factory for grids holding one material everywhere."""

    def build(shape, E, nu, rho=1.0) -> np.ndarray:
        return np.broadcast_to(normalize([E, nu, rho]), (*shape, 3)).copy()

    return build
