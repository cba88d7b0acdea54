"""Flat-file formats: trajectory CSV."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .conic_geometry import BilliardTable
from .dynamics import PhasePoint, Trajectory
from .integrability import caustic_parameters, energy

TRAJECTORY_COLUMNS = ("bounce_index", "t_hit", "x", "y", "vx_out", "vy_out", "E", "lambda1", "lambda2")


def fmt(x: float) -> str:
    """Shortest-safe lossless decimal: 17 significant digits."""
    return format(float(x), ".17g")


def trajectory_rows(traj: Trajectory) -> list[list[str]]:
    if not traj.bounce_points:
        return []
    times = traj.hit_times
    xi = np.array([p.xi for p in traj.bounce_points])
    v = np.array([p.v for p in traj.bounce_points])
    E = energy(traj.table, PhasePoint(xi, v))
    lam1, lam2 = caustic_parameters(traj.table, xi, v)
    return [
        [str(k), *(fmt(q) for q in (times[k], xi[k, 0], xi[k, 1], v[k, 0], v[k, 1], E[k], lam1[k], lam2[k]))]
        for k in range(len(xi))
    ]


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """One row per impact; ``t_hit`` is the absolute impact time."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        writer.writerows(trajectory_rows(traj))


@dataclass
class TrajectoryTable:
    bounce_index: np.ndarray
    t_hit: np.ndarray
    xi: np.ndarray
    v_out: np.ndarray
    E: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray

    def recheck(self, table: BilliardTable) -> tuple[float, float]:
        """Worst energy and caustic mismatch between the stored and recomputed columns."""
        if len(self.xi) == 0:
            return 0.0, 0.0
        states = PhasePoint(self.xi, self.v_out)
        e_err = np.max(np.abs(energy(table, states) - self.E))
        l1, l2 = caustic_parameters(table, self.xi, self.v_out)
        l_err = max(np.max(np.abs(l1 - self.lambda1)), np.max(np.abs(l2 - self.lambda2)))
        return float(e_err), float(l_err)


def read_trajectory_csv(path) -> TrajectoryTable:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRAJECTORY_COLUMNS:
            raise ValueError(f"unexpected trajectory CSV header: {header}")
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(TRAJECTORY_COLUMNS))
    return TrajectoryTable(
        data[:, 0].astype(int),
        data[:, 1],
        data[:, 2:4],
        data[:, 4:6],
        data[:, 6],
        data[:, 7],
        data[:, 8],
    )
