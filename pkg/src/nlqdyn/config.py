"""JSON experiment configuration.

Documented defaults: ``method = "cocycle-midpoint"``, ``midpoint_iterations = 3``,
``sample_every = 10``, ``output.formats = ["csv", "json", "png"]``,
``grid.ndim = 1``, ``grid.periodic = false``. Everything else is required.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import grid as G
from .dynamics import EvolutionMethod, Method
from .functional import GridNonlinearFunctional
from .state import DensityMatrix, GenuineMixture, barycenter, projector, random_density

SCENARIOS = {
    "linear-limit": "eps = 0: cocycle trajectory vs exact exp(-itH0), and mixture affinity",
    "delta-compare": "closed-form vs numeric mixture discriminator, FD slope, decomposition divergence",
    "spectrum-check": "spectrum, purity, trace and Q conservation; RK4 cross-check",
    "cocycle-check": "cocycle identity residual at s = t = T/2, nonlinear and linear",
    "bracket-audit": "Poisson bracket laws on random functionals and the differential FD oracle",
}
FORMATS = {"csv", "json", "png"}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _get(block: dict, key: str, where: str, default: Any = ..., kind=None):
    if not isinstance(block, dict):
        raise ConfigError(where, "expected an object")
    if key not in block:
        if default is ...:
            raise ConfigError(f"{where}.{key}", "missing required key")
        return default
    val = block[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{where}.{key}", f"expected a number, got {val!r}")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{where}.{key}", f"expected an integer, got {val!r}")
        return val
    return val


@dataclass(frozen=True)
class HamiltonianSpec:
    hop: float
    potential: dict
    eps: float
    alpha: float


@dataclass(frozen=True)
class EvolutionSpec:
    method: EvolutionMethod
    T: float
    sample_every: int = 10


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "json", "png")


@dataclass
class ExperimentConfig:
    scenario: str
    grid: G.GridSpec
    hamiltonian: HamiltonianSpec
    initial: dict
    evolution: EvolutionSpec
    output: OutputSpec = field(default_factory=OutputSpec)
    raw: dict = field(default_factory=dict, repr=False)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of the raw config."""
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def potential(self) -> np.ndarray:
        return potential_samples(self.grid, self.hamiltonian.potential, "hamiltonian.potential")

    def h0(self):
        return G.build_h0(self.grid, self.potential(), self.hamiltonian.hop)

    def functional(self, eps: float | None = None) -> GridNonlinearFunctional:
        eps = self.hamiltonian.eps if eps is None else eps
        return GridNonlinearFunctional(self.h0(), eps, self.hamiltonian.alpha, self.grid)


def potential_samples(grid: G.GridSpec, spec: dict, where: str) -> np.ndarray:
    name = _get(spec, "name", where)
    if name == "free":
        return G.sample_potential(grid, G.free())
    if name == "harmonic":
        omega = _get(spec, "omega", where, 1.0, float)
        return G.sample_potential(grid, G.harmonic(omega))
    if name == "samples":
        vals = _get(spec, "values", where)
        try:
            return G.sample_potential(grid, np.asarray(vals, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"{where}.values", str(exc)) from exc
    raise ConfigError(f"{where}.name", f"unknown potential {name!r} (free, harmonic, samples)")


def wave_samples(grid: G.GridSpec, spec: dict, where: str) -> np.ndarray:
    """Wavefunction samples from a named shape or explicit values."""
    if not isinstance(spec, dict):
        raise ConfigError(where, "expected an object")
    if "samples" in spec:
        re = np.asarray(spec["samples"], dtype=float)
        im = np.asarray(spec.get("imag", np.zeros_like(re)), dtype=float)
        if re.shape != (grid.dim,) or im.shape != re.shape:
            raise ConfigError(f"{where}.samples", f"expected {grid.dim} values")
        return re + 1j * im
    shape = _get(spec, "shape", where)
    try:
        if shape == "gaussian":
            return G.gaussian(
                grid,
                center=_get(spec, "center", where, 0.0),
                width=_get(spec, "width", where, 1.0, float),
                momentum=_get(spec, "momentum", where, 0.0, float),
            )
        if shape == "box":
            return G.box(grid, tuple(_get(spec, "support", where)), tuple(_get(spec, "levels", where, [1.0])))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(where, str(exc)) from exc
    raise ConfigError(f"{where}.shape", f"unknown shape {shape!r} (gaussian, box)")


def build_initial(cfg: ExperimentConfig, seed: int = 0) -> tuple[DensityMatrix, GenuineMixture | None]:
    """Initial density matrix and, when the config gives one, its decomposition."""
    spec = cfg.initial
    kind = _get(spec, "kind", "initial")
    grid = cfg.grid
    if kind == "pure":
        vec = G.wave_to_vector(wave_samples(grid, _get(spec, "state", "initial"), "initial.state"), grid)
        return projector(vec), None
    if kind == "diagonal":
        w = np.asarray(_get(spec, "weights", "initial"), dtype=float)
        if w.shape != (grid.dim,):
            raise ConfigError("initial.weights", f"expected {grid.dim} weights")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError("initial.weights", f"weights must be non-negative and sum to 1 (sum={w.sum()!r})")
        return DensityMatrix(np.diag(w).astype(complex)), None
    if kind == "random":
        rank = _get(spec, "rank", "initial", grid.dim, int)
        rng = np.random.default_rng(seed)
        try:
            return random_density(grid.dim, rng, rank), None
        except ValueError as exc:
            raise ConfigError("initial.rank", str(exc)) from exc
    if kind == "mixture":
        comps = _get(spec, "components", "initial")
        if not isinstance(comps, list) or not comps:
            raise ConfigError("initial.components", "expected a non-empty list")
        weights, states = [], []
        for j, c in enumerate(comps):
            where = f"initial.components[{j}]"
            weights.append(_get(c, "weight", where, kind=float))
            states.append(G.wave_to_vector(wave_samples(grid, _get(c, "state", where), f"{where}.state"), grid))
        total = sum(weights)
        if abs(total - 1.0) > 1e-12 or min(weights) <= 0:
            raise ConfigError(
                "initial.components",
                f"mixture weights must be positive and sum to 1 (sum={total!r})",
            )
        m = GenuineMixture.of(weights, states)
        return barycenter(m), m
    raise ConfigError("initial.kind", f"unknown kind {kind!r} (pure, diagonal, random, mixture)")


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    scenario = _get(raw, "scenario", "<root>")
    if scenario not in SCENARIOS:
        raise ConfigError("scenario", f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}")

    g = _get(raw, "grid", "<root>")
    try:
        grid = G.GridSpec(
            x_min=_get(g, "x_min", "grid", kind=float),
            x_max=_get(g, "x_max", "grid", kind=float),
            n_points=_get(g, "n_points", "grid", kind=int),
            ndim=_get(g, "ndim", "grid", 1, int),
            periodic=bool(_get(g, "periodic", "grid", False)),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from exc

    h = _get(raw, "hamiltonian", "<root>")
    alpha = _get(h, "alpha", "hamiltonian", kind=float)
    if not alpha > 0:
        raise ConfigError("hamiltonian.alpha", "alpha must be positive")
    ham = HamiltonianSpec(
        hop=_get(h, "hop", "hamiltonian", kind=float),
        potential=_get(h, "potential", "hamiltonian"),
        eps=_get(h, "eps", "hamiltonian", kind=float),
        alpha=alpha,
    )

    e = _get(raw, "evolution", "<root>")
    try:
        method = EvolutionMethod(
            kind=Method(_get(e, "method", "evolution", Method.COCYCLE_MIDPOINT.value)),
            dt=_get(e, "dt", "evolution", kind=float),
            midpoint_iterations=_get(e, "midpoint_iterations", "evolution", 3, int),
        )
        T = _get(e, "T", "evolution", kind=float)
        method.n_steps(T)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("evolution", str(exc)) from exc
    sample_every = _get(e, "sample_every", "evolution", 10, int)
    if sample_every < 1:
        raise ConfigError("evolution.sample_every", "must be >= 1")

    o = _get(raw, "output", "<root>", {})
    formats = tuple(_get(o, "formats", "output", ["csv", "json", "png"]))
    bad = set(formats) - FORMATS
    if bad:
        raise ConfigError("output.formats", f"unknown formats {sorted(bad)}")
    out = OutputSpec(directory=str(_get(o, "directory", "output", "out")), formats=formats)

    initial = _get(raw, "initial", "<root>")
    cfg = ExperimentConfig(scenario, grid, ham, initial, EvolutionSpec(method, T, sample_every), out, raw)
    # validate eagerly so errors point at the config, not the run
    potential_samples(grid, ham.potential, "hamiltonian.potential")
    build_initial(cfg)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    return parse_config(raw)

