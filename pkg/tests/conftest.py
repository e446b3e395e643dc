import numpy as np
import pytest

from qrelax.boson import BosonModelParams, prepare_system
from qrelax.goe import GoeParams, sample_goe, uniform_observable
from qrelax.spectral import diagonalize, spectral_width


@pytest.fixture(scope="session")
def small_goe():
    """dim-400 GOE bundled with its spectrum and the uniform observable."""
    H = sample_goe(GoeParams(400, 1.0, seed=7))
    spec = diagonalize(H)
    return H, spec, spectral_width(H), uniform_observable(400)


@pytest.fixture(scope="session")
def boson_v1():
    # full 8008-state model at v = 1, shared by the boson and acceptance tests
    return prepare_system(BosonModelParams(v=1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
