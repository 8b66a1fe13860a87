import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=0xABCDEF))


def random_orthonormal(n, k, rng):
    """Orthonormal n x k block for oracle tests."""
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q
