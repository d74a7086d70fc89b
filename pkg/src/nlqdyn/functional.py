"""Real functionals on Hermitian matrices, their differentials and Poisson brackets.

A functional ``f`` exposes ``value(rho)``, ``differential(rho)`` (the Hermitian
operator ``D`` with ``Tr(nu D) = d/dt f(rho + t nu)``) and, when available,
``hessian(rho, nu)``, the directional derivative of the differential. The
Hessian is what lets a bracket ``{f, h}`` be differentiated in closed form,
so nested brackets (Jacobi identity) need no numerical differencing.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .grid import GridSpec, kernel_diagonal
from .linalg import HermitianOperator, commutator, symmetrize

DIAG_FLOOR = 1e-14
DOMAIN_ATOL = 1e-10


class DomainError(ValueError):
    """Functional evaluated outside its domain."""


def _mat(rho) -> np.ndarray:
    return np.asarray(rho, dtype=complex)


def _tr(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.einsum("ij,ji->", a, b).real)


class DifferentiableFunctional:
    """Base class. Subclasses implement ``_value`` and ``_differential``.

    Supports ``f + g``, ``f - g``, ``c * f``, ``-f`` and pointwise products
    ``f * g``, all with analytic differentials.
    """

    label = "f"

    def _value(self, rho: np.ndarray) -> float:
        raise NotImplementedError

    def _differential(self, rho: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _hessian(self, rho: np.ndarray, nu: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.label} does not provide second derivatives")

    @property
    def has_hessian(self) -> bool:
        return True

    def value(self, rho) -> float:
        return float(self._value(_mat(rho)))

    def differential(self, rho) -> np.ndarray:
        return self._differential(_mat(rho))

    def hessian(self, rho, nu) -> np.ndarray:
        return self._hessian(_mat(rho), _mat(nu))

    __call__ = value

    def __add__(self, other: "DifferentiableFunctional") -> "DifferentiableFunctional":
        return SumFunctional((1.0, self), (1.0, other))

    def __sub__(self, other: "DifferentiableFunctional") -> "DifferentiableFunctional":
        return SumFunctional((1.0, self), (-1.0, other))

    def __neg__(self) -> "DifferentiableFunctional":
        return SumFunctional((-1.0, self))

    def __mul__(self, other):
        if isinstance(other, DifferentiableFunctional):
            return ProductFunctional(self, other)
        return SumFunctional((float(other), self))

    def __rmul__(self, other):
        return SumFunctional((float(other), self))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class LinearFunctional(DifferentiableFunctional):
    """``rho -> Tr(rho A)``; constant differential ``A``."""

    def __init__(self, a, label: str | None = None):
        self.a = HermitianOperator(a).matrix
        self.label = label or "Tr(rho A)"

    def _value(self, rho):
        return _tr(rho, self.a)

    def _differential(self, rho):
        return self.a

    def _hessian(self, rho, nu):
        return np.zeros_like(self.a)


class ConstantFunctional(DifferentiableFunctional):
    def __init__(self, c: float, dim: int):
        self.c = float(c)
        self.dim = dim
        self.label = f"const({c})"

    def _value(self, rho):
        return self.c

    def _differential(self, rho):
        return np.zeros((self.dim, self.dim), dtype=complex)

    def _hessian(self, rho, nu):
        return np.zeros((self.dim, self.dim), dtype=complex)


class GridNonlinearFunctional(DifferentiableFunctional):
    """``Q(rho) = Tr(rho H0) + eps/(alpha+1) * sum_k r_k^(alpha+1) dx^n``.

    ``r_k`` is the kernel diagonal ``rho_kk / dx^n``. The differential is
    ``H0 + eps * diag(r_k^alpha)``. Diagonal values below ``DIAG_FLOOR`` count
    as zero; values below ``-DOMAIN_ATOL`` raise :class:`DomainError`.
    """

    def __init__(self, h0, eps: float, alpha: float, grid: GridSpec):
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        self.h0 = HermitianOperator(h0).matrix
        if self.h0.shape[0] != grid.dim:
            raise ValueError(f"H0 has dimension {self.h0.shape[0]}, grid has {grid.dim}")
        self.eps = float(eps)
        self.alpha = float(alpha)
        self.grid = grid
        self.label = f"Q(eps={eps:g}, alpha={alpha:g})"

    def kernel_diagonal(self, rho) -> np.ndarray:
        r = kernel_diagonal(rho, self.grid)
        if np.min(r) < -DOMAIN_ATOL:
            raise DomainError(f"negative kernel diagonal {np.min(r):.3e} outside the domain of Q")
        return np.where(r < DIAG_FLOOR, 0.0, r)

    def _value(self, rho):
        r = self.kernel_diagonal(rho)
        nonlin = np.sum(r ** (self.alpha + 1.0)) * self.grid.cell
        return _tr(rho, self.h0) + self.eps / (self.alpha + 1.0) * nonlin

    def _differential(self, rho):
        r = self.kernel_diagonal(rho)
        return self.h0 + self.eps * np.diag(r**self.alpha).astype(complex)

    def _hessian(self, rho, nu):
        r = self.kernel_diagonal(rho)
        rp = np.zeros_like(r)
        pos = r > 0
        rp[pos] = self.alpha * r[pos] ** (self.alpha - 1.0)
        dnu = np.real(np.diagonal(nu)) / self.grid.cell
        return self.eps * np.diag(rp * dnu).astype(complex)


class CallableFunctional(DifferentiableFunctional):
    """Wrap user-supplied callables."""

    def __init__(
        self,
        value: Callable[[np.ndarray], float],
        differential: Callable[[np.ndarray], np.ndarray],
        hessian: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
        label: str = "f",
    ):
        self._v = value
        self._d = differential
        self._h = hessian
        self.label = label

    @property
    def has_hessian(self) -> bool:
        return self._h is not None

    def _value(self, rho):
        return self._v(rho)

    def _differential(self, rho):
        return np.asarray(self._d(rho), dtype=complex)

    def _hessian(self, rho, nu):
        if self._h is None:
            return super()._hessian(rho, nu)
        return np.asarray(self._h(rho, nu), dtype=complex)


class SumFunctional(DifferentiableFunctional):
    """Real linear combination ``sum_i c_i f_i``."""

    def __init__(self, *terms: tuple[float, DifferentiableFunctional]):
        self.terms = tuple((float(c), f) for c, f in terms)
        self.label = " + ".join(f"{c:g}*{f.label}" for c, f in self.terms)

    @property
    def has_hessian(self) -> bool:
        return all(f.has_hessian for _, f in self.terms)

    def _value(self, rho):
        return sum(c * f._value(rho) for c, f in self.terms)

    def _differential(self, rho):
        return sum(c * f._differential(rho) for c, f in self.terms)

    def _hessian(self, rho, nu):
        return sum(c * f._hessian(rho, nu) for c, f in self.terms)


class ProductFunctional(DifferentiableFunctional):
    """Pointwise product; differential by the Leibniz rule."""

    def __init__(self, f: DifferentiableFunctional, g: DifferentiableFunctional):
        self.f = f
        self.g = g
        self.label = f"({f.label})*({g.label})"

    @property
    def has_hessian(self) -> bool:
        return self.f.has_hessian and self.g.has_hessian

    def _value(self, rho):
        return self.f._value(rho) * self.g._value(rho)

    def _differential(self, rho):
        return self.f._value(rho) * self.g._differential(rho) + self.g._value(rho) * self.f._differential(rho)

    def _hessian(self, rho, nu):
        df, dg = self.f._differential(rho), self.g._differential(rho)
        return (
            _tr(nu, df) * dg
            + _tr(nu, dg) * df
            + self.f._value(rho) * self.g._hessian(rho, nu)
            + self.g._value(rho) * self.f._hessian(rho, nu)
        )


class BracketFunctional(DifferentiableFunctional):
    """``{f, h}`` as a functional.

    Its differential is ``i[Df, Dh] + Hf(i[Dh, rho]) + Hh(i[rho, Df])``, with
    ``Hf``, ``Hh`` the Hessians (self-adjoint for the trace pairing). Second
    derivatives of the bracket itself are not provided.
    """

    def __init__(self, f: DifferentiableFunctional, h: DifferentiableFunctional):
        if not (f.has_hessian and h.has_hessian):
            raise ValueError("bracket functional needs Hessians of both arguments")
        self.f = f
        self.h = h
        self.label = f"{{{f.label}, {h.label}}}"

    @property
    def has_hessian(self) -> bool:
        return False

    def _value(self, rho):
        return _bracket(self.f._differential(rho), self.h._differential(rho), rho)

    def _differential(self, rho):
        df, dh = self.f._differential(rho), self.h._differential(rho)
        out = 1j * commutator(df, dh)
        out = out + self.f._hessian(rho, 1j * commutator(dh, rho))
        out = out + self.h._hessian(rho, 1j * commutator(rho, df))
        return symmetrize(out)


def _bracket(df: np.ndarray, dh: np.ndarray, rho: np.ndarray) -> float:
    val = 1j * np.einsum("ij,ji->", rho, commutator(df, dh))
    return float(val.real)


def differential(f: DifferentiableFunctional, rho) -> HermitianOperator:
    return HermitianOperator(f.differential(rho))


def fd_directional(f: DifferentiableFunctional, rho, nu, t: float) -> float:
    """Central difference ``(f(rho + t nu) - f(rho - t nu)) / 2t``."""
    if not t > 0:
        raise ValueError("step t must be positive")
    r = _mat(rho)
    n = HermitianOperator(nu).matrix
    return (f.value(r + t * n) - f.value(r - t * n)) / (2.0 * t)


def directional(f: DifferentiableFunctional, rho, nu) -> float:
    """Analytic directional derivative ``Tr(nu D_rho f)``."""
    return _tr(_mat(nu), f.differential(rho))


def random_direction(rho, rng: np.random.Generator, t_max: float = 1e-2, margin: float = 0.5) -> np.ndarray:
    """Random Hermitian direction scaled so that ``rho +- t nu`` keeps at
    least ``margin`` of each diagonal entry for ``t <= t_max``.

    Large directions keep truncation error well above rounding in FD checks.
    """
    r = _mat(rho)
    d = r.shape[0]
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (a + a.conj().T)
    floor = np.min(np.real(np.diagonal(r)))
    if floor <= 0:
        raise DomainError("random_direction needs a strictly positive diagonal")
    return h * (1.0 - margin) * floor / (t_max * np.max(np.abs(np.diagonal(h))))


def poisson_bracket(f: DifferentiableFunctional, h: DifferentiableFunctional, rho) -> float:
    """``{f, h}(rho) = i Tr(rho [D f, D h])``."""
    r = _mat(rho)
    return _bracket(f.differential(r), h.differential(r), r)


def bracket_functional(f: DifferentiableFunctional, h: DifferentiableFunctional) -> BracketFunctional:
    return BracketFunctional(f, h)


def product(f: DifferentiableFunctional, h: DifferentiableFunctional) -> ProductFunctional:
    return ProductFunctional(f, h)
