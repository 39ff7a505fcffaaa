import math

import numpy as np
import pytest

from zkbs import plan_domain


@pytest.fixture(scope="session")
def small_domain():
    """Cheap grid for exactness tests."""
    return plan_domain(L=math.pi, X=16 * math.pi, nx=64, ny=16, delta=0.5)


@pytest.fixture(scope="session")
def desk_domain():
    """The default production grid."""
    return plan_domain(L=math.pi, X=16 * math.pi, nx=256, ny=64, delta=0.5)


@pytest.fixture(scope="session")
def medium_domain():
    """Middle ground for nonlinear runs in unit tests."""
    return plan_domain(L=math.pi, X=16 * math.pi, nx=128, ny=32, delta=0.5)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
