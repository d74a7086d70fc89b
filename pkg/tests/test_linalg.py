import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from nlqdyn.linalg import (
    HermitianOperator,
    commutator,
    dagger,
    hermitian_eig,
    max_norm,
    polar_unitary,
    random_hermitian,
    unitary_exp,
)

from conftest import SX, SY, SZ

seeds = st.integers(0, 2**32 - 1)


def test_eig_identity():
    w, v = hermitian_eig(np.eye(2))
    assert np.allclose(w, [1, 1])
    assert max_norm(dagger(v) @ v - np.eye(2)) < 1e-12


def test_eig_pauli_x_descending():
    w, v = hermitian_eig(SX)
    assert np.allclose(w, [1, -1], atol=1e-14)
    # phase convention: first entry of each column real positive
    assert np.all(v[0].real > 0) and np.allclose(v[0].imag, 0)


def test_eig_round_trip_6x6(rng):
    h = random_hermitian(6, rng)
    w, v = hermitian_eig(h)
    assert np.all(np.diff(w) <= 0)
    assert max_norm((v * w) @ dagger(v) - h) < 1e-12
    assert max_norm(dagger(v) @ v - np.eye(6)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d=st.integers(1, 64))
def test_eig_round_trip_property(seed, d):
    h = random_hermitian(d, np.random.default_rng(seed))
    w, v = hermitian_eig(h)
    assert max_norm((v * w) @ dagger(v) - h) <= 1e-11 * max_norm(h)


def test_eig_deterministic(rng):
    h = random_hermitian(10, rng)
    a = hermitian_eig(h)
    b = hermitian_eig(h.copy())
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_hermitian_operator_validation():
    with pytest.raises(ValueError, match="not Hermitian"):
        HermitianOperator(np.array([[0, 1], [0, 0]]))
    near = SX + 1e-12 * np.array([[0, 1], [0, 0]])
    op = HermitianOperator(near)
    assert np.array_equal(op.matrix, dagger(op.matrix))


def test_hermitian_operator_rejects_nonfinite():
    with pytest.raises(ValueError, match="non-finite"):
        HermitianOperator(np.array([[np.nan, 0], [0, 1]]))


def test_unitary_exp_zero_time(rng):
    assert max_norm(unitary_exp(random_hermitian(5, rng), 0.0) - np.eye(5)) == 0.0


def test_unitary_exp_sigma_z_pi():
    assert max_norm(unitary_exp(SZ, np.pi) + np.eye(2)) < 1e-15


def test_unitary_exp_matches_expm(rng):
    h = random_hermitian(7, rng)
    u = unitary_exp(h, 0.3)
    # independent route: Pade scaling-and-squaring
    assert max_norm(u - scipy.linalg.expm(-0.3j * h)) < 1e-12
    assert max_norm(dagger(u) @ u - np.eye(7)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=seeds, s=st.floats(-3, 3), t=st.floats(-3, 3))
def test_unitary_exp_group_law(seed, s, t):
    h = random_hermitian(6, np.random.default_rng(seed))
    assert max_norm(unitary_exp(h, s) @ unitary_exp(h, t) - unitary_exp(h, s + t)) < 1e-10


def test_commutator_examples(rng):
    b = random_hermitian(3, rng)
    assert max_norm(commutator(np.eye(3), b)) == 0.0
    assert max_norm(commutator(SX, SY) - 2j * SZ) == 0.0


def test_commutator_antisymmetric_and_traceless(rng):
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    b = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert max_norm(commutator(a, b) + commutator(b, a)) < 1e-12
    assert abs(np.trace(commutator(a, b))) < 1e-12


def test_commutator_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        commutator(np.eye(2), np.eye(3))


def test_polar_unitary_restores_unitarity(rng):
    u = unitary_exp(random_hermitian(8, rng), 1.0)
    drifted = u + 1e-9 * rng.normal(size=(8, 8))
    p = polar_unitary(drifted)
    assert max_norm(dagger(p) @ p - np.eye(8)) < 1e-14
    assert max_norm(p - u) < 1e-8
