import numpy as np
import pytest

from nopairlab.grid import make_log_grid


@pytest.fixture(scope="session")
def grid_mid():
    """Medium hydrogenic grid in scaled units (coupling ~ 0.5)."""
    return make_log_grid(2e-6, 300.0, 700)


@pytest.fixture(scope="session")
def grid_small():
    return make_log_grid(1e-5, 80.0, 300)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
