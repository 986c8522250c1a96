import numpy as np
import pytest

from scadenoise.transforms import sensing_system


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sys8():
    """8x8 blocks, CR = 2: n = 32 retained, 32 tail observations."""
    return sensing_system(8, 32)


def spikes(rng, m, k, lo=50.0, hi=200.0):
    z = np.zeros(m)
    idx = rng.choice(m, k, replace=False)
    z[idx] = rng.uniform(lo, hi, k) * rng.choice([-1.0, 1.0], k)
    return z
