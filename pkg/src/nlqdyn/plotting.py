"""Static figures for scenario reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dynamics import Trajectory  # noqa: E402

RC = {
    "axes.labelsize": 11,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "xtick.top": True,
    "ytick.right": True,
    "legend.frameon": False,
    "figure.dpi": 100,
}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_trajectory(traj: Trajectory, path: str | Path, title: str = "") -> Path:
    """Drift of Q and purity, and the spectrum, against time."""
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 3, figsize=(11, 3.2), constrained_layout=True)
        t = traj.times
        q = traj.q_values
        axes[0].plot(t, q - q[0], color="k")
        axes[0].set_xlabel("t")
        axes[0].set_ylabel(r"$Q(\rho_t) - Q(\rho_0)$")
        pur = np.array([s.purity for s in traj.states])
        axes[1].plot(t, pur - pur[0], color="C0")
        axes[1].set_xlabel("t")
        axes[1].set_ylabel(r"purity drift")
        w = np.array([s.eigenvalues for s in traj.states])
        nz = np.flatnonzero(np.max(w, axis=0) > 1e-12)
        axes[2].plot(t, w[:, nz])
        axes[2].set_xlabel("t")
        axes[2].set_ylabel("eigenvalues")
        if title:
            fig.suptitle(title)
        return _save(fig, Path(path))


def plot_gaps(times: np.ndarray, gaps: dict[str, Sequence[float]], path: str | Path, ylabel: str = "max-norm gap") -> Path:
    """Semilog plot of one or more gap curves against time."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 3.5), constrained_layout=True)
        for i, (label, g) in enumerate(gaps.items()):
            g = np.maximum(np.asarray(g, dtype=float), 1e-17)
            ax.semilogy(times, g, label=label, color=f"C{i}")
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.legend()
        return _save(fig, Path(path))


def plot_delta(delta: np.ndarray, axis: np.ndarray, path: str | Path) -> Path:
    """Magnitude of the mixture discriminator as a kernel map."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 4), constrained_layout=True)
        ext = [axis[0], axis[-1], axis[-1], axis[0]]
        im = ax.imshow(np.abs(delta), extent=ext, cmap="magma")
        fig.colorbar(im, ax=ax, label=r"$|\Delta|$")
        ax.set_xlabel("y")
        ax.set_ylabel("x")
        return _save(fig, Path(path))


def plot_convergence(steps: Sequence[float], errors: Sequence[float], path: str | Path, order: float | None = None) -> Path:
    """Log-log error against step size, with an optional reference slope."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.5), constrained_layout=True)
        ax.loglog(steps, errors, "o-", color="k", label="measured")
        if order is not None:
            ref = errors[0] * (steps / steps[0]) ** order
            ax.loglog(steps, ref, "--", color="C3", label=f"slope {order:g}")
        ax.set_xlabel("step")
        ax.set_ylabel("error")
        ax.legend()
        return _save(fig, Path(path))
