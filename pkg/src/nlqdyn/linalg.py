"""Dense complex matrix primitives.

Every generator in this package is Hermitian, so exponentials go through the
eigendecomposition instead of a general Pade scheme.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_ATOL = 1e-10
MAX_DIM = 256


class LinalgError(RuntimeError):
    """Eigensolver failure; carries the reconstruction residual when known."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


def max_norm(a) -> float:
    """Largest absolute entry."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a)))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


class HermitianOperator:
    """A validated Hermitian matrix, stored exactly symmetrized.

    Construction fails when ``max|M - M^dagger|`` exceeds ``atol``. Instances
    behave as arrays (``np.asarray(op)`` returns the matrix).
    """

    __slots__ = ("_m",)

    def __init__(self, matrix, atol: float = HERMITIAN_ATOL):
        m = _as_square(matrix)
        resid = max_norm(m - dagger(m))
        if resid > atol:
            raise ValueError(f"matrix is not Hermitian: max|M - M^dagger| = {resid:.3e}")
        m = 0.5 * (m + dagger(m))
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


def symmetrize(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + dagger(m))


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # first component above tolerance made real positive, column by column
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            c = col[idx[0]]
            v[:, k] = col * (np.abs(c) / c)
    return v


def hermitian_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``H = V diag(w) V^dagger`` with ``w`` descending.

    Eigenvector phases are fixed so the first non-negligible entry of each
    column is real and positive, which makes the output reproducible.
    """
    m = symmetrize(_as_square(h))
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise LinalgError(f"eigh failed: {exc}") from exc
    w = w[::-1].copy()
    v = _fix_phases(v[:, ::-1])
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise LinalgError("eigh returned non-finite values", float("inf"))
    return w, v


def unitary_exp(h, s: float) -> np.ndarray:
    """Return ``exp(-i s H)`` for Hermitian ``H``."""
    if s == 0:
        return np.eye(np.shape(h)[0], dtype=complex)
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * s * w)) @ dagger(v)


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def polar_unitary(u: np.ndarray) -> np.ndarray:
    """Closest unitary to ``u`` (unitary factor of the polar decomposition)."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + dagger(a))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))
