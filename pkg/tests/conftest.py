import numpy as np
import pytest

from fullerene_gates.spin_model import SystemParams


@pytest.fixture
def params():
    return SystemParams(100.0, 106.35, 50.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def random_state(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)
