"""Random tables and random states of the reflecting domain.

States are drawn by rejection: positions uniform in the table (via its
bounding box), velocities uniform in a disc, kept if ``p(0) <= 0``.
"""

from __future__ import annotations

import math

import numpy as np

from .conic_geometry import BilliardTable
from .dynamics import PhasePoint
from .integrability import constant_term

DEFAULT_SEED = 20160731


def random_table(rng: np.random.Generator) -> BilliardTable:
    a = rng.uniform(1.0, 5.0)
    b = rng.uniform(0.2, 0.85) * a
    sigma = rng.uniform(0.25, 4.0)
    return BilliardTable(a, b, sigma)


def max_speed(table: BilliardTable, factor: float = 1.5) -> float:
    """Speed radius reaching energies past ``sigma (a+b)/2``."""
    return factor * math.sqrt(table.sigma * (table.a + table.b))


def sample_domain_states(
    table: BilliardTable, n: int, rng: np.random.Generator, speed_factor: float = 1.5
) -> PhasePoint:
    vmax = max_speed(table, speed_factor)
    ra, rb = math.sqrt(table.a), math.sqrt(table.b)
    xs, vs, have = [], [], 0
    while have < n:
        m = max(2 * (n - have), 64)
        xi = rng.uniform(-1.0, 1.0, (m, 2)) * [ra, rb]
        r = vmax * np.sqrt(rng.uniform(0.0, 1.0, m))
        ang = rng.uniform(0.0, 2 * np.pi, m)
        v = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)
        keep = (table.boundary_value(xi) <= 1.0) & (constant_term(table, xi, v) <= 0.0)
        xs.append(xi[keep])
        vs.append(v[keep])
        have += int(keep.sum())
    return PhasePoint(np.concatenate(xs)[:n], np.concatenate(vs)[:n])


def sample_boundary_states(
    table: BilliardTable, n: int, rng: np.random.Generator, speed_factor: float = 1.5
) -> PhasePoint:
    """Outgoing boundary states of the domain (velocity pointing inward)."""
    vmax = max_speed(table, speed_factor)
    xs, vs, have = [], [], 0
    while have < n:
        m = max(2 * (n - have), 64)
        xi = table.boundary_point(rng.uniform(0.0, 2 * np.pi, m))
        r = vmax * np.sqrt(rng.uniform(0.0, 1.0, m))
        ang = rng.uniform(0.0, 2 * np.pi, m)
        v = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)
        outward = (xi * table.diag_A * v).sum(-1) > 0
        v[outward] *= -1.0
        keep = constant_term(table, xi, v) <= 0.0
        xs.append(xi[keep])
        vs.append(v[keep])
        have += int(keep.sum())
    return PhasePoint(np.concatenate(xs)[:n], np.concatenate(vs)[:n])
