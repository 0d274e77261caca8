import numpy as np
import pytest

import btk


@pytest.fixture(scope="session")
def w1():
    return btk.make_exponential_weight(1.0)


@pytest.fixture(scope="session")
def w_half():
    return btk.make_exponential_weight(0.5)


@pytest.fixture(scope="session")
def w2():
    return btk.make_exponential_weight(2.0)


@pytest.fixture(scope="session")
def w_dexp():
    return btk.make_double_exponential_weight(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def delta1(w1):
    return w1.m_tau / 8.0


@pytest.fixture(scope="session")
def bt400(w1):
    """Degree-400 table: adequate for |z| <= ~0.95, cheap to build."""
    return btk.build_basis_table(w1, 400)


@pytest.fixture(scope="session")
def lat_half(w1, delta1):
    """Small lattice covering |z| <= 0.5 (a couple thousand points)."""
    return btk.build_lattice(w1, delta1, 0.5, probe_count=20_000)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260823)
