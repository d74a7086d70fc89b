"""Density matrices, pure states, genuine mixtures and purification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import HERMITIAN_ATOL, dagger, hermitian_eig, max_norm

TRACE_ATOL = 1e-10
CLIP_ATOL = 1e-10
NORM_ATOL = 1e-12
WEIGHT_ATOL = 1e-12


class StateError(ValueError):
    """Invalid state data. ``residual`` is the measured violation."""

    invariant = "state"

    def __init__(self, message: str, residual: float):
        super().__init__(f"{self.invariant}: {message} (residual={residual:.3e})")
        self.residual = residual


class NotHermitian(StateError):
    invariant = "Hermitian"


class NotUnitTrace(StateError):
    invariant = "unit trace"


class NotPositive(StateError):
    invariant = "positive semidefinite"


class NotPure(StateError):
    invariant = "pure"


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    Eigenvalues in ``[-clip_atol, 0)`` are clipped to zero and the trace is
    renormalized; anything more negative raises :class:`NotPositive`.
    """

    __slots__ = ("_m", "_w")

    def __init__(self, matrix, clip_atol: float = CLIP_ATOL):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        herm = max_norm(m - dagger(m))
        if herm > HERMITIAN_ATOL:
            raise NotHermitian("max|M - M^dagger| too large", herm)
        m = 0.5 * (m + dagger(m))
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise NotUnitTrace("Tr M differs from 1", abs(tr - 1.0))
        w, v = hermitian_eig(m)
        if w[-1] < -clip_atol:
            raise NotPositive("minimum eigenvalue below tolerance", -w[-1])
        if w[-1] < 0:
            w = np.clip(w, 0.0, None)
            w = w / w.sum()
            m = (v * w) @ dagger(v)
            m = 0.5 * (m + dagger(m))
        m.setflags(write=False)
        w.setflags(write=False)
        self._m = m
        self._w = w

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Spectrum, descending."""
        return self._w

    @property
    def purity(self) -> float:
        return float(np.sum(self._w**2))

    @property
    def trace(self) -> float:
        return float(np.trace(self._m).real)

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, purity={self.purity:.6g})"


def density_from_matrix(m) -> DensityMatrix:
    return DensityMatrix(m)


@dataclass(frozen=True)
class PureState:
    """Unit vector in C^d."""

    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex).reshape(-1)
        err = abs(np.linalg.norm(psi) - 1.0)
        if err > NORM_ATOL:
            raise ValueError(f"state vector is not normalized: |norm - 1| = {err:.3e}")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def normalized(cls, v) -> "PureState":
        v = np.asarray(v, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / n)

    @property
    def dim(self) -> int:
        return self.psi.shape[0]


def projector(psi: PureState) -> DensityMatrix:
    v = psi.psi if isinstance(psi, PureState) else PureState(psi).psi
    return DensityMatrix(np.outer(v, v.conj()))


def pure_vector(rho, atol: float = 1e-10) -> np.ndarray:
    """Unit vector ``psi`` with ``rho = psi psi^dagger``; raises NotPure otherwise."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    gap = 1.0 - rho.purity
    if gap > atol:
        raise NotPure("Tr rho^2 below 1", gap)
    _, v = hermitian_eig(rho.matrix)
    return v[:, 0]


@dataclass(frozen=True)
class GenuineMixture:
    """Finite convex decomposition ``{(lambda_j, rho_j)}``: a discrete measure on states."""

    components: tuple[tuple[float, DensityMatrix], ...]

    def __post_init__(self):
        comps = tuple(
            (float(w), r if isinstance(r, DensityMatrix) else DensityMatrix(r))
            for w, r in self.components
        )
        if not comps:
            raise ValueError("mixture has no components")
        weights = np.array([w for w, _ in comps])
        if np.any(weights <= 0) or np.any(weights > 1):
            raise ValueError(f"mixture weights must lie in (0, 1], got {weights.tolist()}")
        total = weights.sum()
        if abs(total - 1.0) > WEIGHT_ATOL:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        dims = {r.dim for _, r in comps}
        if len(dims) != 1:
            raise ValueError(f"mixture components have different dimensions {sorted(dims)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, weights: Sequence[float], states: Sequence) -> "GenuineMixture":
        """Build from parallel sequences; ``PureState`` entries become projectors."""
        states = [projector(s) if isinstance(s, PureState) else s for s in states]
        return cls(tuple(zip(weights, states)))

    @classmethod
    def dirac(cls, rho) -> "GenuineMixture":
        return cls(((1.0, rho),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def states(self) -> list[DensityMatrix]:
        return [r for _, r in self.components]

    @property
    def dim(self) -> int:
        return self.components[0][1].dim

    def __len__(self) -> int:
        return len(self.components)


def barycenter(m: GenuineMixture) -> DensityMatrix:
    acc = np.zeros((m.dim, m.dim), dtype=complex)
    for w, r in m.components:
        acc += w * r.matrix
    return DensityMatrix(acc)


def spectral_decomposition(rho, cutoff: float = 1e-14) -> GenuineMixture:
    """Eigen-decomposition of ``rho`` as a genuine mixture of pure states."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    w, v = hermitian_eig(rho.matrix)
    keep = w > cutoff
    w = w[keep] / w[keep].sum()
    return GenuineMixture.of(w, [PureState.normalized(v[:, k]) for k in np.flatnonzero(keep)])


def rotated_decomposition(m: GenuineMixture, atol: float = 1e-10) -> GenuineMixture:
    """Equal-weight pair ``{P_a, P_b}`` of orthogonal pure states, re-expressed
    in the rotated basis ``(a +- b)/sqrt 2``.

    Both decompositions have the same barycenter (it is ``(P_a + P_b)/2`` on a
    degenerate eigenspace), so this is a second spectral decomposition of it.
    """
    if len(m) != 2 or abs(m.weights[0] - m.weights[1]) > atol:
        raise ValueError("rotation needs exactly two components of equal weight")
    a, b = (pure_vector(r) for r in m.states)
    overlap = abs(np.vdot(a, b))
    if overlap > atol:
        raise ValueError(f"components are not orthogonal: |<a|b>| = {overlap:.3e}")
    plus = PureState.normalized(a + b)
    minus = PureState.normalized(a - b)
    return GenuineMixture.of([0.5, 0.5], [plus, minus])


def expectation(rho, a) -> float:
    """``Tr(rho A)``; the imaginary rounding residue is dropped."""
    r = np.asarray(rho)
    a = np.asarray(a)
    if r.shape != a.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {a.shape}")
    # Tr(rho A) = sum_ij rho_ij A_ji
    return float(np.einsum("ij,ji->", r, a).real)


ObservableField = Callable[[DensityMatrix], np.ndarray]


def _field_value(a: ObservableField, rho: DensityMatrix) -> np.ndarray:
    val = np.asarray(a(rho), dtype=complex)
    if val.shape != (rho.dim, rho.dim):
        raise ValueError(f"observable field returned shape {val.shape}, expected {(rho.dim, rho.dim)}")
    herm = max_norm(val - dagger(val))
    if herm > HERMITIAN_ATOL:
        raise NotHermitian("observable field value is not Hermitian", herm)
    return val


def mixture_expectation(m: GenuineMixture, a: ObservableField, k: int = 1) -> float:
    """Moment ``sum_j lambda_j Tr(rho_j a(rho_j)^k)`` of an operator-valued field.

    The power is taken on the operator ``a(rho_j)``; see :func:`scalar_moment`
    for the alternative reading that powers the classical variable instead.
    """
    if k < 1:
        raise ValueError("moment order k must be >= 1")
    total = 0.0
    for w, r in m.components:
        ak = np.linalg.matrix_power(_field_value(a, r), k)
        total += w * expectation(r, ak)
    return total


def scalar_moment(m: GenuineMixture, a: ObservableField, k: int = 1) -> float:
    """``sum_j lambda_j (Tr rho_j a(rho_j))^k``."""
    if k < 1:
        raise ValueError("moment order k must be >= 1")
    return float(sum(w * expectation(r, _field_value(a, r)) ** k for w, r in m.components))


def purify(rho) -> PureState:
    """Purification ``sum_k sqrt(w_k) v_k (x) e_k`` on the doubled space."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    d = rho.dim
    w, v = hermitian_eig(rho.matrix)
    w = np.clip(w, 0.0, None)
    # column k of v times sqrt(w_k), placed on ancilla index k: phi[i*d + k]
    phi = (v * np.sqrt(w)).reshape(d * d)
    return PureState.normalized(phi)


def partial_trace_second(sigma, d: int, d2: int) -> DensityMatrix:
    """Trace out the second factor of a ``d*d2`` dimensional state."""
    s = np.asarray(sigma, dtype=complex)
    if s.shape != (d * d2, d * d2):
        raise ValueError(f"cannot factor shape {s.shape} as ({d}*{d2})^2")
    return DensityMatrix(np.einsum("ikjk->ij", s.reshape(d, d2, d, d2)))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random state of given rank (full rank by default)."""
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must be in [1, {d}]")
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ dagger(g)
    return DensityMatrix(m / np.trace(m).real)


def random_pure(d: int, rng: np.random.Generator) -> PureState:
    return PureState.normalized(rng.normal(size=d) + 1j * rng.normal(size=d))
