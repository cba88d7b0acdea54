"""First integrals of the billiard from its Lax pair.

With ``q_lam(x, y) = x1 y1/(a-lam) + x2 y2/(b-lam)`` the Lax matrix is

    L(lam) = [[ q(xi, v),        q(v, v) - sigma ],
              [ 1 - q(xi, xi),  -q(xi, v)        ]]

and ``p(lam) = (lam-a)(lam-b) det L(lam)`` is a quadratic whose roots are the
parameters of the two confocal caustics.  All functions broadcast over a
stack of states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic_geometry import SNAP_TOL, BilliardTable, ConicClass, classify_conic
from .dynamics import PhasePoint, map_scalars, closed_form_arrays
from .errors import ConicError, DomainError

DISCRIMINANT_TOL = 1e-12


def probe_lambdas(table: BilliardTable, count: int = 3) -> tuple[float, ...]:
    """Spectral probe values spread across the poles of ``q_lam``."""
    a, b = table.a, table.b
    probes = (-1.0, b / 2, (a + b) / 2, -(a + b), 2 * a + 1)
    return probes[:count]


def energy(table: BilliardTable, state: PhasePoint):
    return 0.5 * (state.v**2).sum(-1) + 0.5 * table.sigma * (state.xi**2).sum(-1)


def q_form(table: BilliardTable, lam: float, xi, eta, tol: float = SNAP_TOL):
    if abs(lam - table.a) <= tol or abs(lam - table.b) <= tol:
        raise ConicError(f"pole of q at lambda={lam!r}")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return xi[..., 0] * eta[..., 0] / (table.a - lam) + xi[..., 1] * eta[..., 1] / (table.b - lam)


def lax_L(table: BilliardTable, state: PhasePoint, lam: float) -> np.ndarray:
    xi, v = state.xi, state.v
    qxv = q_form(table, lam, xi, v)
    out = np.empty(np.shape(qxv) + (2, 2))
    out[..., 0, 0] = qxv
    out[..., 0, 1] = q_form(table, lam, v, v) - table.sigma
    out[..., 1, 0] = 1.0 - q_form(table, lam, xi, xi)
    out[..., 1, 1] = -qxv
    return out


def lax_M(table: BilliardTable, state: PhasePoint, lam: float) -> np.ndarray:
    """Conjugating matrix: ``L(lam)`` at the next bounce is ``M L M^-1``.

    ``state`` is an outgoing boundary state; the reflection coefficient is
    the one produced by the bounce map.  Raises ``SingularMapError`` where
    the map itself is singular.
    """
    xi, v = state.xi, state.v
    s = table.sigma
    vAv, xAv, _ = map_scalars(table, xi, v)
    _, _, mu = closed_form_arrays(table, xi, v)
    out = np.empty(np.shape(vAv) + (2, 2))
    out[..., 0, 0] = s * lam - vAv * lam + 2 * xAv * mu
    out[..., 0, 1] = 2 * s * xAv * lam - s * mu + vAv * mu
    out[..., 1, 0] = -2 * xAv * lam
    out[..., 1, 1] = s * lam - vAv * lam
    return out


@dataclass(frozen=True)
class CharPolyCoeffs:
    """``p(lam) = c2 lam**2 + c1 lam + c0``."""

    c2: float
    c1: np.ndarray | float
    c0: np.ndarray | float

    def __call__(self, lam):
        return (self.c2 * lam + self.c1) * lam + self.c0

    @property
    def discriminant(self):
        return self.c1 * self.c1 - 4.0 * self.c2 * self.c0

    def roots(self, tol: float = DISCRIMINANT_TOL):
        """Sorted real roots ``(lam1, lam2)`` by the cancellation-free formula.

        A slightly negative discriminant (within ``tol``) is clamped to a
        double root.
        """
        disc = np.asarray(self.discriminant, dtype=float)
        if np.any(disc < -tol):
            raise DomainError(f"complex caustics: discriminant {float(np.min(disc))!r}")
        sq = np.sqrt(np.maximum(disc, 0.0))
        c1 = np.asarray(self.c1, dtype=float)
        c0 = np.asarray(self.c0, dtype=float)
        half = -0.5 * (c1 + np.copysign(sq, c1))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = half / self.c2
            r2 = np.where(half != 0.0, c0 / half, 0.0)
        lo, hi = np.minimum(r1, r2), np.maximum(r1, r2)
        if lo.ndim == 0:
            return float(lo), float(hi)
        return lo, hi


def constant_term(table: BilliardTable, xi, v):
    """``p(0)``; nonpositive exactly on the reflecting domain."""
    a, b, s = table.a, table.b, table.sigma
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v, dtype=float)
    x1, x2 = xi[..., 0], xi[..., 1]
    v1, v2 = v[..., 0], v[..., 1]
    return (v2 * x1 - v1 * x2) ** 2 - (b * v1**2 + a * v2**2) - s * (b * x1**2 + a * x2**2) + a * b * s


def char_poly(table: BilliardTable, state: PhasePoint) -> CharPolyCoeffs:
    s = table.sigma
    c1 = 2.0 * energy(table, state) - s * (table.a + table.b)
    c0 = constant_term(table, state.xi, state.v)
    if np.ndim(c1) == 0:
        c1, c0 = float(c1), float(c0)
    return CharPolyCoeffs(s, c1, c0)


@dataclass(frozen=True)
class CausticPair:
    lambda1: float
    lambda2: float
    classes: tuple[ConicClass, ConicClass]


def caustic_parameters(table: BilliardTable, xi, v, tol: float = DISCRIMINANT_TOL):
    """Array form of ``caustics``: ``(lambda1, lambda2)`` without classification."""
    return char_poly(table, PhasePoint(xi, v)).roots(tol)


def caustics(table: BilliardTable, state: PhasePoint, tol: float = DISCRIMINANT_TOL) -> CausticPair:
    lam1, lam2 = char_poly(table, state).roots(tol)
    if np.ndim(lam1):
        raise ValueError("caustics takes a single state; use caustic_parameters for stacks")
    return CausticPair(lam1, lam2, (classify_conic(table, lam1), classify_conic(table, lam2)))


def in_billiard_domain(table: BilliardTable, state: PhasePoint, tol: float = 0.0, position_tol: float = 1e-12):
    """Membership in the reflecting domain: ``p(0) <= tol`` and ``xi`` in the table.

    ``tol = 1e-12`` is the documented slack setting for states exactly on
    the boundary of the domain.
    """
    c0 = constant_term(table, state.xi, state.v)
    inside = table.boundary_value(state.xi) <= 1.0 + position_tol
    res = (c0 <= tol) & inside
    return bool(res) if np.ndim(res) == 0 else res


@dataclass(frozen=True)
class InvariantData:
    E: float
    lambda2: float


def momentum_map(table: BilliardTable, state: PhasePoint, tol: float = 1e-12) -> InvariantData:
    """``(E, lambda2)``: energy and the inner caustic parameter."""
    ok = in_billiard_domain(table, state, tol=tol)
    if not np.all(ok):
        raise DomainError("state not in billiard domain (p(0) > 0 or outside the table)")
    s, a, b = table.sigma, table.a, table.b
    E = energy(table, state)
    v2 = (state.v**2).sum(-1)
    x2 = (state.xi**2).sum(-1)
    c0 = constant_term(table, state.xi, state.v)
    lin = s * (a + b) - v2 - s * x2
    lam2 = (lin + np.sqrt(np.maximum(lin * lin - 4 * s * c0, 0.0))) / (2 * s)
    if np.ndim(E) == 0:
        return InvariantData(float(E), float(lam2))
    return InvariantData(E, lam2)
