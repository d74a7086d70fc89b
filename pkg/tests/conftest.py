import numpy as np
import pytest

from nlqdyn.functional import GridNonlinearFunctional
from nlqdyn.grid import GridSpec, box, build_h0, harmonic, wave_to_vector
from nlqdyn.state import GenuineMixture

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(-8.0, 8.0, 32)


@pytest.fixture(scope="session")
def h0_32(grid32):
    return build_h0(grid32, harmonic(1.0), hop=0.5)


def grid_q(grid, h0, eps, alpha=1.0):
    return GridNonlinearFunctional(h0, eps, alpha, grid)


def two_box_pair(grid, lam=0.5):
    """Two-valued functions on disjoint supports."""
    p1 = wave_to_vector(box(grid, (-6.0, -2.0), (1.0, 2.0)), grid)
    p2 = wave_to_vector(box(grid, (2.0, 6.0), (2.0, 1.0)), grid)
    return GenuineMixture.of([lam, 1.0 - lam], [p1, p2]), p1, p2
