import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)


def random_image(rng, w, h, lo=0, hi=256):
    return rng.integers(lo, hi, size=(h, w), dtype=np.uint8)
