"""Nonlinear density-matrix dynamics ``i d(rho)/dt = [D_rho Q, rho]``.

The reference integrator advances the unitary cocycle: each step conjugates
the state by ``exp(-i dt D_mid Q)`` where ``D_mid`` is the differential at a
fixed-point iterated midpoint state. Conjugation keeps the spectrum exact, so
trace, purity and rank are preserved to rounding. ``RK4`` integrates the
commutator equation directly and serves as an independent cross-check.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .functional import DifferentiableFunctional, DomainError
from .grid import GridSpec
from .linalg import commutator, dagger, hermitian_eig, max_norm, polar_unitary, symmetrize, unitary_exp
from .state import (
    DensityMatrix,
    GenuineMixture,
    PureState,
    barycenter,
    projector,
    pure_vector,
)

log = logging.getLogger(__name__)

REORTHONORMALIZE_EVERY = 100
RK4_NEGATIVITY_ATOL = 1e-8


class IntegrationError(RuntimeError):
    def __init__(self, message: str, step: int | None = None, component: int | None = None):
        where = []
        if component is not None:
            where.append(f"component {component}")
        if step is not None:
            where.append(f"step {step}")
        super().__init__(f"{message}" + (f" [{', '.join(where)}]" if where else ""))
        self.step = step
        self.component = component


class Method(str, enum.Enum):
    COCYCLE_MIDPOINT = "cocycle-midpoint"
    RK4 = "rk4"


@dataclass(frozen=True)
class EvolutionMethod:
    kind: Method = Method.COCYCLE_MIDPOINT
    dt: float = 1e-3
    midpoint_iterations: int = 3

    def __post_init__(self):
        object.__setattr__(self, "kind", Method(self.kind))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 1 <= self.midpoint_iterations <= 8:
            raise ValueError("midpoint_iterations must be in [1, 8]")

    def n_steps(self, T: float) -> int:
        """Number of steps covering ``[0, T]``; ``T`` must be a multiple of dt."""
        n = int(round(T / self.dt))
        if n < 1 or abs(n * self.dt - T) > 1e-9 * max(1.0, T):
            raise ValueError(f"T={T} is not a positive multiple of dt={self.dt}")
        return n


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[DensityMatrix]
    q_values: np.ndarray
    cocycles: list[np.ndarray] | None = None
    label: str = ""

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class PureTrajectory:
    times: np.ndarray
    vectors: list[PureState]
    q_values: np.ndarray

    def projectors(self) -> list[DensityMatrix]:
        return [projector(p) for p in self.vectors]


@dataclass
class MixtureTrajectory:
    weights: np.ndarray
    components: list[Trajectory] = field(default_factory=list)
    functional: DifferentiableFunctional | None = None

    @property
    def times(self) -> np.ndarray:
        return self.components[0].times

    def barycenters(self) -> list[np.ndarray]:
        """Weighted sums of the component states at each sample."""
        out = []
        for i in range(len(self.times)):
            out.append(sum(w * c.states[i].matrix for w, c in zip(self.weights, self.components)))
        return out

    def mixture_at(self, i: int) -> GenuineMixture:
        return GenuineMixture(tuple((w, c.states[i]) for w, c in zip(self.weights, self.components)))


def rhs(Q: DifferentiableFunctional, rho) -> np.ndarray:
    """``d(rho)/dt = -i [D_rho Q, rho]`` (Hermitian, traceless)."""
    r = np.asarray(rho, dtype=complex)
    return symmetrize(-1j * commutator(Q.differential(r), r))


def _sample_indices(n_steps: int, sample_every: int) -> set[int]:
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    idx = set(range(0, n_steps + 1, sample_every))
    idx.add(n_steps)
    return idx


def _midpoint_unitary(Q: DifferentiableFunctional, rho: np.ndarray, dt: float, iterations: int) -> np.ndarray:
    mid = rho
    for _ in range(iterations):
        u = unitary_exp(Q.differential(mid), dt)
        mid = 0.5 * (rho + u @ rho @ dagger(u))
    return unitary_exp(Q.differential(mid), dt)


def _rk4_step(Q: DifferentiableFunctional, rho: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(Q, rho)
    k2 = rhs(Q, rho + 0.5 * dt * k1)
    k3 = rhs(Q, rho + 0.5 * dt * k2)
    k4 = rhs(Q, rho + dt * k3)
    return symmetrize(rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def evolve_elementary(
    Q: DifferentiableFunctional,
    rho0,
    T: float,
    method: EvolutionMethod = EvolutionMethod(),
    sample_every: int = 1,
) -> Trajectory:
    """Evolve a single density matrix (an elementary mixture) up to time ``T``.

    With the cocycle integrator the accumulated unitary ``u(t, rho0)`` is
    recorded at every sample; RK4 trajectories carry no cocycle.
    """
    rho0 = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
    n = method.n_steps(T)
    keep = _sample_indices(n, sample_every)
    dt = T / n
    cocycle_mode = method.kind is Method.COCYCLE_MIDPOINT
    clip = 1e-10 if cocycle_mode else RK4_NEGATIVITY_ATOL

    rho = rho0.matrix.copy()
    u = np.eye(rho0.dim, dtype=complex)
    times, states, qs, us = [0.0], [rho0], [Q.value(rho)], [u.copy()]
    for step in range(1, n + 1):
        if cocycle_mode:
            us_step = _midpoint_unitary(Q, rho, dt, method.midpoint_iterations)
            rho = symmetrize(us_step @ rho @ dagger(us_step))
            u = us_step @ u
            if step % REORTHONORMALIZE_EVERY == 0:
                u = polar_unitary(u)
        else:
            try:
                rho = _rk4_step(Q, rho, dt)
            except DomainError as exc:
                raise IntegrationError(f"RK4 stage left the domain of Q ({exc}), reduce dt", step=step) from exc
            wmin = np.linalg.eigvalsh(rho)[0]
            if wmin < -RK4_NEGATIVITY_ATOL:
                raise IntegrationError(f"eigenvalue {wmin:.3e} below tolerance, reduce dt", step=step)
        if step in keep:
            times.append(step * dt)
            try:
                states.append(DensityMatrix(rho, clip_atol=clip))
            except ValueError as exc:
                raise IntegrationError(str(exc), step=step) from exc
            qs.append(Q.value(rho))
            us.append(u.copy())
    return Trajectory(
        times=np.array(times),
        states=states,
        q_values=np.array(qs),
        cocycles=us if cocycle_mode else None,
        label=Q.label,
    )


def evolve_pure(
    Q: DifferentiableFunctional,
    psi0: PureState,
    T: float,
    method: EvolutionMethod = EvolutionMethod(),
    sample_every: int = 1,
) -> PureTrajectory:
    """Nonlinear wave equation ``i d(psi)/dt = D_psi Q psi``.

    The cocycle integrator applies the same step unitary as
    :func:`evolve_elementary` would for ``P_psi``. RK4 steps are renormalized
    to keep ``psi`` on the unit sphere.
    """
    n = method.n_steps(T)
    keep = _sample_indices(n, sample_every)
    dt = T / n
    psi = np.asarray(psi0.psi, dtype=complex).copy()

    def proj(v):
        return np.outer(v, v.conj())

    def f(v):
        return -1j * Q.differential(proj(v)) @ v

    times, vecs, qs = [0.0], [psi0], [Q.value(proj(psi))]
    for step in range(1, n + 1):
        if method.kind is Method.COCYCLE_MIDPOINT:
            rho = proj(psi)
            psi = _midpoint_unitary(Q, rho, dt, method.midpoint_iterations) @ psi
        else:
            k1 = f(psi)
            k2 = f(psi + 0.5 * dt * k1)
            k3 = f(psi + 0.5 * dt * k2)
            k4 = f(psi + dt * k3)
            psi = psi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            psi = psi / np.linalg.norm(psi)
        if step in keep:
            times.append(step * dt)
            vecs.append(PureState(psi))
            qs.append(Q.value(proj(psi)))
    return PureTrajectory(times=np.array(times), vectors=vecs, q_values=np.array(qs))


def evolve_genuine(
    Q: DifferentiableFunctional,
    m: GenuineMixture,
    T: float,
    method: EvolutionMethod = EvolutionMethod(),
    sample_every: int = 1,
    max_workers: int = 1,
) -> MixtureTrajectory:
    """Move every component along the flow; the weights stay fixed."""

    def run(j_rho):
        j, rho = j_rho
        try:
            return evolve_elementary(Q, rho, T, method, sample_every)
        except (IntegrationError, ValueError) as exc:
            raise IntegrationError(str(exc), getattr(exc, "step", None), component=j) from exc

    jobs = list(enumerate(m.states))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            comps = list(pool.map(run, jobs))
    else:
        comps = [run(job) for job in jobs]
    return MixtureTrajectory(weights=m.weights, components=comps, functional=Q)


def cocycle(Q: DifferentiableFunctional, rho, t: float, method: EvolutionMethod) -> tuple[np.ndarray, DensityMatrix]:
    """``(u(t, rho), phi_t(rho))``; ``u(0, rho)`` is the identity."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    if t == 0:
        return np.eye(rho.dim, dtype=complex), rho
    if method.kind is not Method.COCYCLE_MIDPOINT:
        raise ValueError("cocycle unitaries are only produced by the cocycle-midpoint method")
    n = method.n_steps(t)
    traj = evolve_elementary(Q, rho, t, method, sample_every=n)
    return traj.cocycles[-1], traj.final


def cocycle_identity_residual(Q: DifferentiableFunctional, rho, s: float, t: float, method: EvolutionMethod = EvolutionMethod()) -> float:
    """``max|u(t+s, rho) - u(s, phi_t(rho)) u(t, rho)|``."""
    if s < 0 or t < 0:
        raise ValueError("s and t must be non-negative")
    u_ts, _ = cocycle(Q, rho, t + s, method)
    u_t, rho_t = cocycle(Q, rho, t, method)
    u_s, _ = cocycle(Q, rho_t, s, method)
    return max_norm(u_ts - u_s @ u_t)


def _pure_components(m: GenuineMixture) -> list[tuple[float, np.ndarray]]:
    return [(w, pure_vector(r)) for w, r in m.components]


def delta_analytic(eps: float, alpha: float, m: GenuineMixture, grid: GridSpec) -> np.ndarray:
    """Closed-form difference at ``t = 0`` between the genuine and elementary
    time derivatives of ``rho = sum_j lambda_j P_j``, in matrix form.

    With ``chi_j(x) = |psi_j(x)|^(2 alpha) - (sum_k lambda_k |psi_k(x)|^2)^alpha``
    the commutator difference has kernel
    ``eps sum_j lambda_j psi_j(x) conj(psi_j(y)) (chi_j(x) - chi_j(y))``; the
    returned matrix is ``-i`` times that (the derivative difference, Hermitian).
    """
    comps = _pure_components(m)
    cell = grid.cell
    dens = [np.abs(v) ** 2 / cell for _, v in comps]
    mixed = sum(w * p for (w, _), p in zip(comps, dens))
    out = np.zeros((grid.dim, grid.dim), dtype=complex)
    for (w, v), p in zip(comps, dens):
        chi = p**alpha - mixed**alpha
        # psi_j(x) conj(psi_j(y)) dx = v_a conj(v_b)
        out += w * np.outer(v, v.conj()) * (chi[:, None] - chi[None, :])
    return -1j * eps * out


def delta_numeric(Q: DifferentiableFunctional, m: GenuineMixture) -> np.ndarray:
    """``sum_j lambda_j rhs(Q, P_j) - rhs(Q, barycenter)``."""
    _pure_components(m)
    genuine = sum(w * rhs(Q, r) for w, r in m.components)
    return genuine - rhs(Q, barycenter(m))


def delta_finite_difference(Q: DifferentiableFunctional, m: GenuineMixture, t: float, method: EvolutionMethod) -> np.ndarray:
    """``(sum_j lambda_j phi_t(rho_j) - phi_t(rho_bar)) / t`` from short trajectories."""
    genuine = evolve_genuine(Q, m, t, method, sample_every=method.n_steps(t))
    elementary = evolve_elementary(Q, barycenter(m), t, method, sample_every=method.n_steps(t))
    return (genuine.barycenters()[-1] - elementary.final.matrix) / t


def spectrum_drift(traj: Trajectory) -> float:
    w0 = traj.states[0].eigenvalues
    return max(max_norm(s.eigenvalues - w0) for s in traj.states)


def purity_drift(traj: Trajectory) -> float:
    p0 = traj.states[0].purity
    return max(abs(s.purity - p0) for s in traj.states)


def trace_drift(traj: Trajectory) -> float:
    return max(abs(np.trace(s.matrix).real - 1.0) for s in traj.states)


def energy_drift(traj: Trajectory) -> float:
    """Relative drift ``max|Q(t) - Q(0)| / max(1, |Q(0)|)``."""
    q0 = traj.q_values[0]
    return float(np.max(np.abs(traj.q_values - q0)) / max(1.0, abs(q0)))


def exact_linear_gap(h0, traj: Trajectory) -> float:
    """Max gap between a trajectory and ``exp(-itH0) rho0 exp(itH0)``."""
    rho0 = traj.states[0].matrix
    w, v = hermitian_eig(h0)
    gap = 0.0
    for t, s in zip(traj.times, traj.states):
        u = (v * np.exp(-1j * t * w)) @ dagger(v)
        gap = max(gap, max_norm(s.matrix - u @ rho0 @ dagger(u)))
    return gap

