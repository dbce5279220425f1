import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20260809))


def random_unit(rng, n=None):
    """Uniform points on the sphere, shape (3,) or (n, 3)."""
    shape = (3,) if n is None else (n, 3)
    p = rng.normal(size=shape)
    return p / np.linalg.norm(p, axis=-1, keepdims=True)
