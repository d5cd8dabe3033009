import numpy as np
import pytest

from shearmhd.spectral import Grid
from shearmhd.weights import WeightParams


@pytest.fixture
def grid16():
    return Grid(16, 16, 1.0)


@pytest.fixture
def grid32():
    return Grid(32, 32, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def small_params():
    """Weights small enough for direct (non-log) pairing on 32x32 grids."""
    return WeightParams(rho=0.004, lam0=1.3, s=0.6, alpha=1.0, c0=0.05, eps=1e-3)


@pytest.fixture
def default_params():
    return WeightParams()
