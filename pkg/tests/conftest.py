import numpy as np
import pytest

from tamedspde import SineBasis


@pytest.fixture(scope="session")
def basis64():
    return SineBasis(64)


@pytest.fixture(scope="session")
def basis16():
    return SineBasis(16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
