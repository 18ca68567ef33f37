import numpy as np
import pytest

from models import get_model


@pytest.fixture
def jc():
    return get_model("jc", {"omega0": 1.0, "omega": 2.0, "g": 1.0, "s0": 1.0})


@pytest.fixture
def sp():
    return get_model("sp")


@pytest.fixture
def quasi():
    return get_model("quasi", {"ball_radius": 1.0})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_jc_state(rng, s0=1.0):
    spin = rng.normal(size=3)
    spin *= s0 / np.linalg.norm(spin)
    return np.concatenate([spin, rng.normal(scale=0.8, size=2)])


def random_sp_state(rng):
    q = rng.normal(size=3)
    q /= np.linalg.norm(q)
    p = rng.normal(size=3)
    p -= (q @ p) * q
    return np.concatenate([q, p])
