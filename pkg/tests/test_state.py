import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlqdyn.linalg import max_norm, random_hermitian
from nlqdyn.state import (
    DensityMatrix,
    GenuineMixture,
    NotHermitian,
    NotPositive,
    NotPure,
    NotUnitTrace,
    PureState,
    barycenter,
    density_from_matrix,
    expectation,
    mixture_expectation,
    partial_trace_second,
    projector,
    pure_vector,
    purify,
    random_density,
    random_pure,
    rotated_decomposition,
    scalar_moment,
    spectral_decomposition,
)

from conftest import SX, SZ

seeds = st.integers(0, 2**32 - 1)


class TestDensityMatrix:
    def test_maximally_mixed(self):
        rho = density_from_matrix(np.eye(4) / 4)
        assert rho.purity == pytest.approx(0.25)

    def test_classical_diagonal(self):
        rho = density_from_matrix(np.diag([0.7, 0.3]))
        assert np.allclose(rho.eigenvalues, [0.7, 0.3])

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NotPositive) as err:
            density_from_matrix(np.diag([1.2, -0.2]))
        assert err.value.residual == pytest.approx(0.2)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            density_from_matrix(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_not_unit_trace(self):
        with pytest.raises(NotUnitTrace) as err:
            density_from_matrix(np.diag([0.5, 0.4]))
        assert err.value.residual == pytest.approx(0.1)

    def test_tiny_negative_eigenvalue_clipped(self):
        rho = density_from_matrix(np.diag([1.0 + 5e-11, -5e-11]))
        assert rho.eigenvalues.min() == 0.0
        assert rho.trace == pytest.approx(1.0, abs=1e-15)

    def test_immutable(self):
        rho = density_from_matrix(np.eye(2) / 2)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1.0


class TestProjector:
    def test_basis(self):
        assert np.array_equal(projector(PureState(np.array([1, 0]))).matrix, np.diag([1, 0]))

    def test_plus(self):
        p = projector(PureState.normalized([1, 1]))
        assert max_norm(p.matrix - 0.5 * np.ones((2, 2))) < 1e-15

    def test_idempotent(self, rng):
        p = projector(random_pure(8, rng)).matrix
        assert max_norm(p @ p - p) < 1e-12
        assert projector(random_pure(8, rng)).purity == pytest.approx(1.0, abs=1e-12)

    def test_pure_state_norm_checked(self):
        with pytest.raises(ValueError, match="normalized"):
            PureState(np.array([1.0, 1.0]))

    def test_pure_vector_round_trip(self, rng):
        psi = random_pure(6, rng)
        v = pure_vector(projector(psi))
        assert abs(abs(np.vdot(v, psi.psi)) - 1) < 1e-12
        with pytest.raises(NotPure):
            pure_vector(np.eye(6) / 6)


class TestMixture:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to"):
            GenuineMixture.of([0.5, 0.4], [np.diag([1, 0]), np.diag([0, 1])])

    def test_weights_positive(self):
        with pytest.raises(ValueError, match=r"\(0, 1\]"):
            GenuineMixture.of([1.5, -0.5], [np.diag([1, 0]), np.diag([0, 1])])

    def test_empty(self):
        with pytest.raises(ValueError, match="no components"):
            GenuineMixture(())

    def test_dirac_barycenter(self, rng):
        rho = random_density(4, rng)
        assert max_norm(barycenter(GenuineMixture.dirac(rho)).matrix - rho.matrix) < 1e-15

    def test_two_poles(self):
        m = GenuineMixture.of([0.5, 0.5], [np.diag([1, 0]), np.diag([0, 1])])
        assert max_norm(barycenter(m).matrix - np.eye(2) / 2) == 0.0

    def test_random_barycenter_valid(self, rng):
        m = GenuineMixture.of([0.2, 0.3, 0.5], [random_density(4, rng) for _ in range(3)])
        b = barycenter(m)
        assert abs(b.trace - 1) < 1e-12 and b.eigenvalues.min() >= 0

    def test_barycenter_affine_under_merge(self, rng):
        a = GenuineMixture.of([0.4, 0.6], [random_density(3, rng) for _ in range(2)])
        b = GenuineMixture.of([0.7, 0.3], [random_density(3, rng) for _ in range(2)])
        c = 0.25
        merged = GenuineMixture(
            tuple((c * w, r) for w, r in a.components) + tuple(((1 - c) * w, r) for w, r in b.components)
        )
        expect = c * barycenter(a).matrix + (1 - c) * barycenter(b).matrix
        assert max_norm(barycenter(merged).matrix - expect) < 1e-15

    def test_spectral_decomposition_reproduces_state(self, rng):
        rho = random_density(5, rng, rank=3)
        m = spectral_decomposition(rho)
        assert len(m) == 3
        assert max_norm(barycenter(m).matrix - rho.matrix) < 1e-12

    def test_rotated_decomposition(self):
        m = GenuineMixture.of([0.5, 0.5], [PureState(np.array([1, 0, 0])), PureState(np.array([0, 1, 0]))])
        alt = rotated_decomposition(m)
        assert max_norm(barycenter(alt).matrix - barycenter(m).matrix) < 1e-15
        assert max_norm(alt.states[0].matrix - m.states[0].matrix) > 0.4

    def test_rotated_decomposition_requires_equal_weights(self):
        m = GenuineMixture.of([0.3, 0.7], [PureState(np.array([1, 0])), PureState(np.array([0, 1]))])
        with pytest.raises(ValueError, match="equal weight"):
            rotated_decomposition(m)


class TestExpectation:
    def test_identity(self, rng):
        assert expectation(random_density(5, rng), np.eye(5)) == pytest.approx(1.0, abs=1e-14)

    def test_diagonal(self):
        assert expectation(np.diag([0.7, 0.3]), SZ) == pytest.approx(0.4)

    def test_naive_double_loop(self, rng):
        rho = random_density(4, rng).matrix
        a = random_hermitian(4, rng)
        naive = 0j
        for i in range(4):
            for j in range(4):
                naive += rho[i, j] * a[j, i]
        assert expectation(rho, a) == pytest.approx(naive.real, abs=1e-13)
        assert abs(naive.imag) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            expectation(np.eye(2) / 2, np.eye(3))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, x=st.floats(-5, 5), p=st.floats(0, 1))
    def test_linear_in_a_affine_in_rho(self, seed, x, p):
        rng = np.random.default_rng(seed)
        r1, r2 = random_density(4, rng), random_density(4, rng)
        a, b = random_hermitian(4, rng), random_hermitian(4, rng)
        assert expectation(r1, x * a + b) == pytest.approx(x * expectation(r1, a) + expectation(r1, b), abs=1e-11)
        mix = p * r1.matrix + (1 - p) * r2.matrix
        assert expectation(mix, a) == pytest.approx(p * expectation(r1, a) + (1 - p) * expectation(r2, a), abs=1e-12)


class TestMixtureExpectation:
    poles = GenuineMixture.of([0.5, 0.5], [np.diag([1, 0]), np.diag([0, 1])])

    def test_constant_field_is_barycentric(self, rng):
        m = GenuineMixture.of([0.3, 0.7], [random_density(3, rng) for _ in range(2)])
        a = random_hermitian(3, rng)
        assert mixture_expectation(m, lambda nu: a) == pytest.approx(expectation(barycenter(m), a), abs=1e-13)

    def test_identity_field_any_moment(self, rng):
        m = GenuineMixture.of([0.3, 0.7], [random_density(3, rng) for _ in range(2)])
        for k in (1, 2, 5):
            assert mixture_expectation(m, lambda nu: np.eye(3), k) == pytest.approx(1.0, abs=1e-13)

    def test_scalar_times_identity_field(self):
        # a(nu) = Tr(nu sz) I: Tr(nu a(nu)) = Tr(nu sz) is linear, so both routes give 0.5
        def field(nu):
            return expectation(nu, SZ) * np.eye(2)

        m = GenuineMixture.of([0.75, 0.25], [np.diag([1, 0]), np.diag([0, 1])])
        rho_bar = barycenter(m)
        assert mixture_expectation(m, field) == pytest.approx(0.75 - 0.25)
        assert expectation(rho_bar, field(rho_bar)) == pytest.approx(0.5)

    def test_non_affine_witness(self):
        # a(nu) = Tr(nu sz) sz; both mixtures have barycenter I/2
        def field(nu):
            return expectation(nu, SZ) * SZ

        plus = PureState.normalized([1, 1])
        minus = PureState.normalized([1, -1])
        other = GenuineMixture.of([0.5, 0.5], [plus, minus])
        assert max_norm(barycenter(other).matrix - barycenter(self.poles).matrix) < 1e-15
        assert mixture_expectation(self.poles, field) == pytest.approx(1.0)
        assert mixture_expectation(other, field) == pytest.approx(0.0, abs=1e-15)

    def test_moment_readings_differ(self):
        # a(nu) = sx + Tr(nu sz) sz on the poles: operator power vs scalar power
        def field(nu):
            return SX + expectation(nu, SZ) * SZ

        assert mixture_expectation(self.poles, field, 2) == pytest.approx(2.0)
        assert scalar_moment(self.poles, field, 2) == pytest.approx(1.0)

    def test_rejects_bad_order_and_non_hermitian(self):
        with pytest.raises(ValueError, match="k must"):
            mixture_expectation(self.poles, lambda nu: SZ, 0)
        with pytest.raises(NotHermitian):
            mixture_expectation(self.poles, lambda nu: np.array([[0, 1], [0, 0]]))
        with pytest.raises(ValueError, match="shape"):
            mixture_expectation(self.poles, lambda nu: np.eye(3))


class TestPurification:
    def test_pure_state(self, rng):
        psi = random_pure(3, rng)
        phi = purify(projector(psi)).psi.reshape(3, 3)
        # only the first ancilla slot is populated, and it carries psi up to phase;
        # the others hold sqrt of rounding-level eigenvalues, hence the 1e-7 floor
        assert max_norm(phi[:, 1:]) < 1e-7
        assert abs(abs(np.vdot(phi[:, 0], psi.psi)) - 1) < 1e-12

    def test_maximally_mixed_gives_bell_state(self):
        phi = purify(np.eye(2) / 2).psi.reshape(2, 2)
        # maximally entangled: phi * sqrt 2 is unitary
        assert max_norm(2 * phi @ phi.conj().T - np.eye(2)) < 1e-15

    def test_round_trip_d5(self, rng):
        rho = random_density(5, rng)
        back = partial_trace_second(projector(purify(rho)), 5, 5)
        assert max_norm(back.matrix - rho.matrix) < 1e-12

    def test_partial_trace_product(self, rng):
        r1, r2 = random_density(2, rng), random_density(3, rng)
        out = partial_trace_second(np.kron(r1.matrix, r2.matrix), 2, 3)
        assert max_norm(out.matrix - r1.matrix) < 1e-15

    def test_partial_trace_bell(self):
        bell = PureState.normalized([1, 0, 0, 1])
        assert max_norm(partial_trace_second(projector(bell), 2, 2).matrix - np.eye(2) / 2) < 1e-15

    def test_partial_trace_duality_on_basis(self, rng):
        d, d2 = 3, 4
        sigma = random_density(d * d2, rng)
        rho = partial_trace_second(sigma, d, d2)
        basis = []
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                if i == j:
                    e[i, i] = 1
                elif i < j:
                    e[i, j] = e[j, i] = 1
                else:
                    e[i, j], e[j, i] = 1j, -1j
                basis.append(e)
        assert len(basis) == 9
        for a in basis:
            lhs = expectation(sigma, np.kron(a, np.eye(d2)))
            assert expectation(rho, a) == pytest.approx(lhs, abs=1e-13)

    def test_partial_trace_dimension_mismatch(self):
        with pytest.raises(ValueError, match="cannot factor"):
            partial_trace_second(np.eye(6) / 6, 4, 2)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, d=st.integers(1, 8))
    def test_round_trip_property(self, seed, d):
        rng = np.random.default_rng(seed)
        rank = int(rng.integers(1, d + 1))
        rho = random_density(d, rng, rank)
        back = partial_trace_second(projector(purify(rho)), d, d)
        assert max_norm(back.matrix - rho.matrix) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 10))
def test_constructed_states_satisfy_invariants(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, rng, int(rng.integers(1, d + 1)))
    assert abs(rho.trace - 1) <= 1e-10
    assert rho.eigenvalues.min() >= 0
    assert max_norm(rho.matrix - rho.matrix.conj().T) == 0.0
    assert isinstance(DensityMatrix(rho.matrix), DensityMatrix)
