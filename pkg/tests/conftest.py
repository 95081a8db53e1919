import numpy as np
import pytest

from graphgauge import liealg
from graphgauge.graphlat import build_hypercubic


@pytest.fixture(scope="session")
def gens():
    return liealg.make_generators()


@pytest.fixture(scope="session")
def small_graph():
    """2^4 periodic lattice: 16 events, 64 transitions, 96 actions."""
    return build_hypercubic((2, 2, 2, 2))


@pytest.fixture(scope="session")
def mid_graph():
    return build_hypercubic((4, 4, 4, 4))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
