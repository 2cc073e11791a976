import numpy as np
import pytest

from pnlab import Grid1D, exact_pn_layer, make_cosine_potential, make_pn_potential


@pytest.fixture(scope="session")
def pn1():
    return make_pn_potential(1.0)


@pytest.fixture(scope="session")
def two_harmonic():
    # alpha = 1.5, W'''(0) = 0, genuinely nonzero corrector
    return make_cosine_potential([1.0, 0.5])


@pytest.fixture(scope="session")
def grid40():
    return Grid1D(-40.0, 40.0, 2048)


@pytest.fixture(scope="session")
def layer40(grid40):
    return exact_pn_layer(1.0, grid40)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
