import numpy as np
import pytest

from orbit_forge.statespace import QubitState, apply_local, catalog_state, random_local_unitaries, random_state


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ghz():
    return catalog_state("ghz")


@pytest.fixture
def singlet():
    return catalog_state("singlet")


@pytest.fixture
def product3():
    return catalog_state("product", n=3)


@pytest.fixture
def random3():
    return random_state(3, 7)


@pytest.fixture
def rotate():
    """state -> state moved by seeded Haar local unitaries (with a global phase)."""
    def _rotate(state: QubitState, seed: int) -> QubitState:
        return apply_local(state, random_local_unitaries(state.n, np.random.default_rng(seed)))
    return _rotate
