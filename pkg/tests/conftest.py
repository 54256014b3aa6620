import numpy as np
import pytest

from asymspec import geometric_grid


@pytest.fixture
def grid():
    """Default sampling grid: h0=1, ratio 0.5, 20 points, 6-point tail."""
    return geometric_grid()


@pytest.fixture
def coarse_grid():
    """Cheap 8-point grid for tests that only need a rough tail."""
    return geometric_grid(1.0, 0.5, 8, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
