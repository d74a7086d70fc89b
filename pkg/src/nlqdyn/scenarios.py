"""Named experiments. Each one runs, writes its files and returns a report of
numeric checks; the process verdict is the conjunction of the checks."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, build_initial
from .dynamics import (
    EvolutionMethod,
    Method,
    cocycle_identity_residual,
    delta_analytic,
    delta_finite_difference,
    delta_numeric,
    energy_drift,
    evolve_elementary,
    evolve_genuine,
    exact_linear_gap,
    purity_drift,
    spectrum_drift,
    trace_drift,
)
from .export import export_trajectory
from .functional import (
    LinearFunctional,
    bracket_functional,
    directional,
    fd_directional,
    poisson_bracket,
    product,
    random_direction,
)
from .linalg import max_norm, random_hermitian
from .state import (
    GenuineMixture,
    StateError,
    random_density,
    rotated_decomposition,
    spectral_decomposition,
)

log = logging.getLogger(__name__)

FD_STEPS = (1e-2, 1e-3, 1e-4)


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    comparison: str  # "<=" or ">="
    detail: str = ""

    def __post_init__(self):
        self.value = float(self.value)
        self.threshold = float(self.threshold)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.comparison == "<=":
            return bool(self.value <= self.threshold)
        return bool(self.value >= self.threshold)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.value:.3e} {self.comparison} {self.threshold:.1e}"


@dataclass
class RunReport:
    scenario: str
    config: dict
    config_sha256: str
    seed: int
    checks: list[Check] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "tool": "nlqdyn",
            "version": __version__,
            "scenario": self.scenario,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [asdict(c) | {"passed": c.passed} for c in self.checks],
            "files": self.files,
            "config": self.config,
        }


class _Outputs:
    def __init__(self, cfg: ExperimentConfig, out_dir: Path, report: RunReport):
        self.cfg = cfg
        self.dir = out_dir
        self.report = report
        self.x_obs = {"x": np.diag(cfg.grid.points[:, 0]).astype(complex)}

    def want(self, fmt: str) -> bool:
        return fmt in self.cfg.output.formats

    def _add(self, paths):
        for p in paths:
            self.report.files.append(str(Path(p).relative_to(self.dir)))

    def trajectory(self, traj, name: str):
        if self.want("csv"):
            self._add(export_trajectory(traj, self.dir / f"{name}.csv", self.x_obs))

    def figure(self, fn, name: str, *args, **kwargs):
        if self.want("png"):
            from . import plotting

            self._add([getattr(plotting, fn)(*args, path=self.dir / f"{name}.png", **kwargs)])


def _decomposition(rho, mixture: GenuineMixture | None) -> GenuineMixture:
    return mixture if mixture is not None else spectral_decomposition(rho)


def _observed_order(steps, errors) -> float:
    """Least-squares slope of log(error) against log(step)."""
    e = np.maximum(np.asarray(errors, dtype=float), 1e-300)
    return float(np.polyfit(np.log(steps), np.log(e), 1)[0])


def linear_limit(cfg: ExperimentConfig, out: _Outputs, seed: int) -> list[Check]:
    Q = cfg.functional(eps=0.0)
    method = cfg.evolution.method
    rho0, mixture = build_initial(cfg, seed)
    T, every = cfg.evolution.T, cfg.evolution.sample_every
    elem = evolve_elementary(Q, rho0, T, method, every)
    gen = evolve_genuine(Q, _decomposition(rho0, mixture), T, method, every)
    affinity = max(max_norm(b - s.matrix) for b, s in zip(gen.barycenters(), elem.states))
    out.trajectory(elem, "elementary")
    out.trajectory(gen, "genuine")
    checks = [Check("affinity_residual", affinity, 1e-9, "<=", "barycenter of evolved mixture vs evolved barycenter")]
    if method.kind is Method.COCYCLE_MIDPOINT:
        checks.append(Check("exact_propagator_gap", exact_linear_gap(Q.h0, elem), 1e-8, "<=", "vs exp(-itH0) rho0 exp(itH0)"))
    checks.append(Check("trace_drift", trace_drift(elem), 1e-10, "<="))
    out.figure("plot_trajectory", "elementary", elem, title="linear limit")
    return checks


def delta_compare(cfg: ExperimentConfig, out: _Outputs, seed: int) -> list[Check]:
    Q = cfg.functional()
    method = cfg.evolution.method
    rho0, mixture = build_initial(cfg, seed)
    if mixture is None:
        raise ConfigError("initial.kind", "delta-compare needs a mixture of pure states")
    da = delta_analytic(Q.eps, Q.alpha, mixture, cfg.grid)
    dn = delta_numeric(Q, mixture)
    checks = [
        Check("delta_cross_formula", max_norm(da - dn), 1e-10, "<=", "closed form vs rhs difference"),
        Check("delta_magnitude", max_norm(da), 1e-6, ">="),
    ]
    errs = []
    for t in FD_STEPS:
        fd = delta_finite_difference(Q, mixture, t, EvolutionMethod(method.kind, t / 10, method.midpoint_iterations))
        errs.append(max_norm(fd - dn))
    order = _observed_order(FD_STEPS, errs)
    checks.append(Check("fd_slope_order", order, 0.9, ">=", "errors " + ", ".join(f"{e:.3e}" for e in errs)))
    checks.append(Check("fd_slope_error_smallest_t", errs[-1], 1e-3 * max(1.0, max_norm(dn)), "<="))

    try:
        alt = rotated_decomposition(mixture)
        alt_name = "rotated eigenbasis"
    except (ValueError, StateError):
        alt = spectral_decomposition(rho0)
        alt_name = "spectral"
    T, every = cfg.evolution.T, cfg.evolution.sample_every
    gen = evolve_genuine(Q, mixture, T, method, every)
    other = evolve_genuine(Q, alt, T, method, every)
    elem = evolve_elementary(Q, rho0, T, method, every)
    gaps = [max_norm(a - b) for a, b in zip(gen.barycenters(), other.barycenters())]
    elem_gaps = [max_norm(a - s.matrix) for a, s in zip(gen.barycenters(), elem.states)]
    checks.append(Check("decomposition_divergence", gaps[-1], 1e-4, ">=", f"given mixture vs {alt_name} decomposition at T"))
    checks.append(Check("elementary_divergence", elem_gaps[-1], 1e-4, ">=", "given mixture vs elementary evolution at T"))
    tr = max(abs(np.trace(b).real - 1.0) for b in gen.barycenters() + other.barycenters())
    checks.append(Check("trace_drift", tr, 1e-10, "<="))

    out.trajectory(gen, "genuine")
    out.trajectory(other, "alternative")
    out.trajectory(elem, "elementary")
    out.figure("plot_delta", "delta", da, cfg.grid.axis if cfg.grid.ndim == 1 else np.arange(cfg.grid.dim))
    out.figure("plot_gaps", "divergence", gen.times, {f"vs {alt_name}": gaps, "vs elementary": elem_gaps})
    out.figure("plot_convergence", "fd_slope", FD_STEPS, errs, order=1.0)
    return checks


def spectrum_check(cfg: ExperimentConfig, out: _Outputs, seed: int) -> list[Check]:
    Q = cfg.functional()
    method = cfg.evolution.method
    rho0, _ = build_initial(cfg, seed)
    T, every = cfg.evolution.T, cfg.evolution.sample_every
    traj = evolve_elementary(Q, rho0, T, method, every)
    checks = [
        Check("spectrum_drift", spectrum_drift(traj), 1e-8, "<="),
        Check("purity_drift", purity_drift(traj), 1e-8, "<="),
        Check("trace_drift", trace_drift(traj), 1e-10, "<="),
        Check("energy_drift_relative", energy_drift(traj), 1e-6, "<="),
    ]
    if method.kind is Method.COCYCLE_MIDPOINT:
        # RK4 pushes zero eigenvalues negative at O(dt^4) per unit time; half steps
        # keep a rank-deficient state clear of the negativity guard
        rk = evolve_elementary(Q, rho0, T, EvolutionMethod(Method.RK4, method.dt / 2), 2 * every)
        gap = max(max_norm(a.matrix - b.matrix) for a, b in zip(traj.states, rk.states))
        checks.append(Check("rk4_agreement", gap, 1e-6, "<=", "cocycle-midpoint vs rk4 at dt/2"))
    out.trajectory(traj, "elementary")
    out.figure("plot_trajectory", "elementary", traj, title="conservation")
    return checks


def cocycle_check(cfg: ExperimentConfig, out: _Outputs, seed: int) -> list[Check]:
    method = cfg.evolution.method
    if method.kind is not Method.COCYCLE_MIDPOINT:
        raise ConfigError("evolution.method", "cocycle-check requires cocycle-midpoint")
    rho0, _ = build_initial(cfg, seed)
    half = cfg.evolution.T / 2
    res = cocycle_identity_residual(cfg.functional(), rho0, half, half, method)
    res_lin = cocycle_identity_residual(cfg.functional(eps=0.0), rho0, half, half, method)
    return [
        Check("cocycle_residual", res, 5e-7, "<=", f"s = t = {half:g}"),
        Check("cocycle_residual_linear", res_lin, 1e-12, "<=", "eps = 0"),
    ]


def bracket_audit(cfg: ExperimentConfig, out: _Outputs, seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    anti = bil = jac = leib = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 17))
        a, b, c = (random_hermitian(d, rng, 1 / np.sqrt(d)) for _ in range(3))
        f, g, h = LinearFunctional(a), LinearFunctional(b), LinearFunctional(c)
        rho = random_density(d, rng)
        anti = max(anti, abs(poisson_bracket(f, g, rho) + poisson_bracket(g, f, rho)))
        x, y = rng.normal(size=2)
        lhs = poisson_bracket(x * f + y * g, h, rho)
        bil = max(bil, abs(lhs - x * poisson_bracket(f, h, rho) - y * poisson_bracket(g, h, rho)))
        cyc = (
            poisson_bracket(f, bracket_functional(g, h), rho)
            + poisson_bracket(g, bracket_functional(h, f), rho)
            + poisson_bracket(h, bracket_functional(f, g), rho)
        )
        jac = max(jac, abs(cyc))
        ref = f(rho) * poisson_bracket(g, h, rho) + g(rho) * poisson_bracket(f, h, rho)
        leib = max(leib, abs(poisson_bracket(product(f, g), h, rho) - ref))
    checks = [
        Check("antisymmetry", anti, 1e-12, "<="),
        Check("bilinearity", bil, 1e-12, "<="),
        Check("jacobi", jac, 1e-10, "<="),
        Check("leibniz", leib, 1e-12, "<="),
    ]

    Q = cfg.functional()
    d = cfg.grid.dim
    worst_order, worst_err = np.inf, 0.0
    for _ in range(20):
        rho = random_density(d, rng)
        nu = random_direction(rho, rng, FD_STEPS[0])
        exact = directional(Q, rho, nu)
        errs = [abs(fd_directional(Q, rho, nu, t) - exact) for t in FD_STEPS]
        worst_err = max(worst_err, errs[0])
        if errs[0] > 1e-10:
            worst_order = min(worst_order, _observed_order(FD_STEPS, errs))
    if math.isinf(worst_order):
        checks.append(Check("fd_oracle_exact", worst_err, 1e-10, "<=", "Q quadratic: central differences exact"))
    else:
        checks.append(Check("fd_oracle_order", worst_order, 1.8, ">=", "min observed order over 20 pairs"))
    return checks


RUNNERS = {
    "linear-limit": linear_limit,
    "delta-compare": delta_compare,
    "spectrum-check": spectrum_check,
    "cocycle-check": cocycle_check,
    "bracket-audit": bracket_audit,
}


def run(cfg: ExperimentConfig, out_dir: str | Path | None = None, seed: int = 0) -> RunReport:
    """Execute the configured scenario and write its outputs."""
    out_dir = Path(out_dir if out_dir is not None else cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport(cfg.scenario, cfg.raw, cfg.digest(), seed)
    outputs = _Outputs(cfg, out_dir, report)
    log.info("running %s", cfg.scenario)
    report.checks = RUNNERS[cfg.scenario](cfg, outputs, seed)
    if outputs.want("json"):
        path = out_dir / "report.json"
        report.files.append(path.name)
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return report
