import numpy as np
import pytest

from pomest.sampling import make_rng


@pytest.fixture
def rng():
    return make_rng(20260811)


def haar_pure(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
