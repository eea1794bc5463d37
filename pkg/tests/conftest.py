import numpy as np
import pytest

from metaplab.signals import default_grid, gaussian


@pytest.fixture(scope="session")
def grid256():
    return default_grid(256)


@pytest.fixture(scope="session")
def phi(grid256):
    return gaussian(grid256)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
