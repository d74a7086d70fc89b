"""CSV export of trajectories.

Floats are written with 17 significant digits so files round-trip exactly
and identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

import numpy as np

from .dynamics import MixtureTrajectory, Trajectory
from .state import DensityMatrix, expectation


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _rows(times, states, q_values, observables):
    for t, s, q in zip(times, states, q_values):
        row = [fmt(t)]
        row += [fmt(expectation(s, a)) for a in observables.values()]
        row += [fmt(q), fmt(s.trace), fmt(s.purity)]
        row += [fmt(w) for w in s.eigenvalues]
        yield row


def _write(path: Path, times, states, q_values, observables) -> Path:
    if len(times) == 0:
        raise ValueError("cannot export an empty trajectory")
    dim = states[0].dim
    header = ["t", *observables.keys(), "Q", "trace", "purity"] + [f"w{k + 1}" for k in range(dim)]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(_rows(times, states, q_values, observables))
    return path


def export_trajectory(
    traj: Trajectory | MixtureTrajectory,
    path: str | Path,
    observables: Mapping[str, np.ndarray] | None = None,
) -> list[Path]:
    """Write ``traj`` as CSV and return the files written.

    A :class:`Trajectory` goes to ``path``. A :class:`MixtureTrajectory` is
    written as one file per component (``<stem>_component<j>.csv``) plus
    ``<stem>_barycenter.csv``, where ``path`` supplies the stem.
    Columns: ``t``, one per observable, ``Q``, ``trace``, ``purity`` and the
    eigenvalues ``w1..wd`` in descending order.
    """
    path = Path(path)
    observables = dict(observables or {})
    if isinstance(traj, Trajectory):
        return [_write(path, traj.times, traj.states, traj.q_values, observables)]

    stem = path.with_suffix("")
    files = []
    for j, comp in enumerate(traj.components):
        out = stem.parent / f"{stem.name}_component{j}.csv"
        files.append(_write(out, comp.times, comp.states, comp.q_values, observables))
    bary = [DensityMatrix(b) for b in traj.barycenters()]
    if traj.functional is not None:
        q = [traj.functional.value(b) for b in bary]
    else:
        q = [float("nan")] * len(bary)
    files.append(_write(stem.parent / f"{stem.name}_barycenter.csv", traj.times, bary, q, observables))
    return files


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and float data of an exported file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])
