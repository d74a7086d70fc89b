"""Finite-difference discretization of L^2(R^n), n = 1 or 2.

Conventions: grid points are cell centres ``x_k = x_min + (k + 1/2) dx``;
a wavefunction becomes the vector ``psi(x_k) sqrt(dx)`` (per axis), and an
operator kernel ``K(x, y)`` becomes the matrix ``K(x_i, x_j) dx``. With these
choices matrix traces equal kernel integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import MAX_DIM, HermitianOperator
from .state import PureState


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int
    ndim: int = 1
    periodic: bool = False

    def __post_init__(self):
        if self.ndim not in (1, 2):
            raise ValueError(f"ndim must be 1 or 2, got {self.ndim}")
        if self.n_points < 4:
            raise ValueError(f"n_points must be >= 4, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.dim > MAX_DIM:
            raise ValueError(f"grid dimension {self.dim} exceeds {MAX_DIM}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def cell(self) -> float:
        """Cell volume dx^n."""
        return self.dx**self.ndim

    @property
    def dim(self) -> int:
        return self.n_points**self.ndim

    @property
    def axis(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_points) + 0.5) * self.dx

    @property
    def points(self) -> np.ndarray:
        """Grid points, shape ``(dim, ndim)``, row-major over axes."""
        if self.ndim == 1:
            return self.axis[:, None]
        xx, yy = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])


def _laplacian_1d(n: int, dx: float, periodic: bool) -> np.ndarray:
    lap = -2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    if periodic:
        lap[0, -1] = lap[-1, 0] = 1.0
    return lap / dx**2


def laplacian(grid: GridSpec) -> np.ndarray:
    lap = _laplacian_1d(grid.n_points, grid.dx, grid.periodic)
    if grid.ndim == 1:
        return lap
    eye = np.eye(grid.n_points)
    return np.kron(lap, eye) + np.kron(eye, lap)


Potential = Callable[[np.ndarray], np.ndarray]


def harmonic(omega: float = 1.0) -> Potential:
    """``V(x) = omega^2 |x|^2 / 2``."""
    return lambda x: 0.5 * omega**2 * np.sum(x**2, axis=1)


def free() -> Potential:
    return lambda x: np.zeros(x.shape[0])


def sample_potential(grid: GridSpec, potential: Potential | np.ndarray | None) -> np.ndarray:
    if potential is None:
        return np.zeros(grid.dim)
    if callable(potential):
        v = np.asarray(potential(grid.points), dtype=float).reshape(-1)
    else:
        v = np.asarray(potential, dtype=float).reshape(-1)
    if v.shape != (grid.dim,):
        raise ValueError(f"potential has {v.size} samples, grid has {grid.dim} points")
    if not np.all(np.isfinite(v)):
        raise ValueError("potential samples must be finite")
    return v


def build_h0(grid: GridSpec, potential: Potential | np.ndarray | None = None, hop: float = 0.5) -> HermitianOperator:
    """``-hop * Laplacian + diag(V)`` with the 2n+1 point stencil."""
    v = sample_potential(grid, potential)
    h = -hop * laplacian(grid) + np.diag(v)
    return HermitianOperator(h.astype(complex))


def wave_to_vector(samples, grid: GridSpec) -> PureState:
    s = np.asarray(samples, dtype=complex).reshape(-1)
    if s.shape != (grid.dim,):
        raise ValueError(f"got {s.size} samples for a grid of {grid.dim} points")
    if not np.any(s):
        raise ValueError("wavefunction samples are all zero")
    return PureState.normalized(s * np.sqrt(grid.cell))


def vector_to_wave(psi: PureState, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`wave_to_vector` up to normalization: samples ``psi(x_k)``."""
    return np.asarray(psi.psi) / np.sqrt(grid.cell)


def kernel_diagonal(rho, grid: GridSpec) -> np.ndarray:
    """Kernel diagonal ``rho(x_k, x_k) = rho_kk / dx^n``."""
    m = np.asarray(rho)
    if m.shape != (grid.dim, grid.dim):
        raise ValueError(f"state of shape {m.shape} does not match grid dimension {grid.dim}")
    return np.real(np.diagonal(m)) / grid.cell


def gaussian(grid: GridSpec, center: float | Sequence[float] = 0.0, width: float = 1.0, momentum: float = 0.0) -> np.ndarray:
    """Samples of a Gaussian wavepacket (unnormalized)."""
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.ndim,))
    x = grid.points - c
    env = np.exp(-np.sum(x**2, axis=1) / (2.0 * width**2))
    return env * np.exp(1j * momentum * x[:, 0])


def box(grid: GridSpec, support: tuple[float, float], levels: Sequence[float] = (1.0,)) -> np.ndarray:
    """Piecewise-constant samples on ``support`` along the first axis.

    The support is split into ``len(levels)`` equal sub-intervals with the
    given amplitudes; ``levels=(1, 2)`` gives a two-valued function.
    """
    lo, hi = map(float, support)
    if not hi > lo:
        raise ValueError("box support must have hi > lo")
    x = grid.points[:, 0]
    out = np.zeros(grid.dim)
    edges = np.linspace(lo, hi, len(levels) + 1)
    for a, b, level in zip(edges[:-1], edges[1:], levels):
        out[(x >= a) & (x < b)] = level
    if not np.any(out):
        raise ValueError(f"box support {support} contains no grid points")
    return out
