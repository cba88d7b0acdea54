"""Bifurcation diagram: sampled momentum-map images plus the region outline."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .conic_geometry import BilliardTable
from .foliation import HalfLine, bifurcation_set
from .integrability import momentum_map
from .io import fmt
from .sampling import sample_domain_states


@dataclass
class DiagramData:
    table: BilliardTable
    points: np.ndarray  # (N, 2) columns E, lambda2
    boundary: np.ndarray  # outline of the image region, (M, 2)
    critical: tuple[HalfLine, HalfLine, HalfLine]
    e_max: float

    @property
    def corners(self) -> np.ndarray:
        return np.array([line.endpoint for line in self.critical])


def bifurcation_diagram(table: BilliardTable, samples: int, rng: np.random.Generator) -> DiagramData:
    if samples < 2:
        raise ValueError("diagram needs at least 2 samples")
    states = sample_domain_states(table, samples, rng)
    inv = momentum_map(table, states)
    points = np.column_stack([inv.E, inv.lambda2])
    e_b, e_a, e_ab = table.band_energies()
    e_max = max(2 * e_ab, float(points[:, 0].max()))
    # the middle corner is collinear but kept as a vertex so all three are marked
    boundary = np.array(
        [[e_max, table.a], [e_b, table.a], [e_a, table.b], [e_ab, 0.0], [e_max, 0.0]]
    )
    return DiagramData(table, points, boundary, bifurcation_set(table), e_max)


def write_diagram_csv(path, data: DiagramData) -> None:
    """Layers: ``sample`` points, region ``boundary``, ``critical`` half-lines, ``corner`` dots."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("layer", "E", "lambda2"))
        for E, lam in data.points:
            w.writerow(("sample", fmt(E), fmt(lam)))
        for E, lam in data.boundary:
            w.writerow(("boundary", fmt(E), fmt(lam)))
        for line in data.critical:
            w.writerow(("critical", fmt(line.e_start), fmt(line.lambda2)))
            w.writerow(("critical", fmt(data.e_max), fmt(line.lambda2)))
        for E, lam in data.corners:
            w.writerow(("corner", fmt(E), fmt(lam)))
