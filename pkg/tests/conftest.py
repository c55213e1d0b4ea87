import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tqg.spectral import make_grid

settings.register_profile(
    "default",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid8():
    return make_grid(8)


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16)


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64)


@pytest.fixture(autouse=True)
def _seeded_numpy():
    # Belt and braces: nothing in the package uses the global RNG, but a test
    # calling np.random directly should still be repeatable.
    np.random.seed(0)
