"""Elliptic tables and tolerance-aware predicates for their confocal conics.

The table is the ellipse ``x**2/a + y**2/b = 1`` with ``a > b > 0``.  Its
confocal family is

    C_lam : x**2/(a - lam) + y**2/(b - lam) = 1,

an ellipse for ``lam < b``, a hyperbola for ``b < lam < a`` and degenerate at
``lam = b`` (the focal segment line) and ``lam = a`` (the minor axis).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ConicError

#: absolute snap tolerance in lambda for the distinguished values 0, b, a
SNAP_TOL = 1e-9
TANGENCY_SAMPLES = 4096


@dataclass(frozen=True)
class BilliardTable:
    """Elliptic table ``x**2/a + y**2/b <= 1`` in the potential ``sigma*|xi|**2/2``."""

    a: float
    b: float
    sigma: float

    def __post_init__(self):
        for name in ("a", "b", "sigma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.a > self.b > 0:
            raise ValueError(f"need a > b > 0, got a={self.a}, b={self.b}")
        if not self.sigma > 0:
            raise ValueError(f"need sigma > 0, got sigma={self.sigma}")

    @property
    def omega(self) -> float:
        return math.sqrt(self.sigma)

    @property
    def focal_parameter(self) -> float:
        """``c**2 = a - b``, the squared focal distance."""
        return self.a - self.b

    @property
    def A(self) -> np.ndarray:
        return np.diag([1.0 / self.a, 1.0 / self.b])

    @property
    def diag_A(self) -> np.ndarray:
        return np.array([1.0 / self.a, 1.0 / self.b])

    def boundary_value(self, point) -> np.ndarray | float:
        """``x**2/a + y**2/b``; equals 1 on the boundary."""
        p = np.asarray(point, dtype=float)
        return p[..., 0] ** 2 / self.a + p[..., 1] ** 2 / self.b

    def contains(self, point, tol: float = 1e-12):
        return self.boundary_value(point) <= 1.0 + tol

    def on_boundary(self, point, tol: float = 1e-9):
        return np.abs(self.boundary_value(point) - 1.0) <= tol

    def boundary_point(self, angle) -> np.ndarray:
        """Point of the table boundary at parametric angle ``angle``."""
        angle = np.asarray(angle, dtype=float)
        return np.stack(
            [math.sqrt(self.a) * np.cos(angle), math.sqrt(self.b) * np.sin(angle)],
            axis=-1,
        )

    def band_energies(self) -> tuple[float, float, float]:
        """The critical energies ``sigma*b/2``, ``sigma*a/2``, ``sigma*(a+b)/2``."""
        s = self.sigma
        return s * self.b / 2, s * self.a / 2, s * (self.a + self.b) / 2


class ConicClass(enum.Enum):
    OUTER_ELLIPSE = "outer_ellipse"  # lam < 0
    BOUNDARY_ELLIPSE = "boundary_ellipse"  # lam = 0
    INNER_ELLIPSE = "inner_ellipse"  # 0 < lam < b
    DEGENERATE_FOCAL = "degenerate_focal"  # lam = b
    HYPERBOLA = "hyperbola"  # b < lam < a
    DEGENERATE_MINOR_AXIS = "degenerate_minor_axis"  # lam = a


def classify_conic(table: BilliardTable, lam: float, tol: float = SNAP_TOL) -> ConicClass:
    """Type of the confocal conic ``C_lam``.

    Values within ``tol`` of 0, b or a snap to the boundary/degenerate
    classes; if two distinguished values are within ``tol`` the nearest wins.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a, b = table.a, table.b
    if lam > a + tol:
        raise ConicError(f"not a caustic parameter: lambda={lam!r} > a={a!r}")
    snaps = [
        (abs(lam - d), cls)
        for d, cls in (
            (0.0, ConicClass.BOUNDARY_ELLIPSE),
            (b, ConicClass.DEGENERATE_FOCAL),
            (a, ConicClass.DEGENERATE_MINOR_AXIS),
        )
        if abs(lam - d) <= tol
    ]
    if snaps:
        return min(snaps, key=lambda item: item[0])[1]
    if lam < 0:
        return ConicClass.OUTER_ELLIPSE
    if lam < b:
        return ConicClass.INNER_ELLIPSE
    if lam < a:
        return ConicClass.HYPERBOLA
    return ConicClass.DEGENERATE_MINOR_AXIS


def conic_value(table: BilliardTable, lam: float, point, tol: float = SNAP_TOL):
    """``x**2/(a-lam) + y**2/(b-lam) - 1``; vectorised over the last axis of ``point``."""
    if abs(lam - table.a) <= tol or abs(lam - table.b) <= tol:
        raise ConicError(f"degenerate conic has no quadric form (lambda={lam!r})")
    p = np.asarray(point, dtype=float)
    return p[..., 0] ** 2 / (table.a - lam) + p[..., 1] ** 2 / (table.b - lam) - 1.0


def foci(table: BilliardTable) -> tuple[np.ndarray, np.ndarray]:
    c = math.sqrt(table.focal_parameter)
    return np.array([c, 0.0]), np.array([-c, 0.0])


@dataclass(frozen=True)
class FlowEllipse:
    """Origin-centred ellipse ``theta -> amplitude @ (cos theta, sin theta)``.

    A harmonic orbit ``xi cos(wt) + (v/w) sin(wt)`` has amplitude matrix
    with columns ``xi`` and ``v/w``.  Zero angular momentum gives a segment
    through the origin, which is still handled (as a degenerate ellipse).
    """

    amplitude: np.ndarray

    def __post_init__(self):
        m = np.array(self.amplitude, dtype=float).reshape(2, 2)
        m.setflags(write=False)
        object.__setattr__(self, "amplitude", m)

    @classmethod
    def from_state(cls, xi, v, omega: float) -> "FlowEllipse":
        xi = np.asarray(xi, dtype=float)
        v = np.asarray(v, dtype=float)
        return cls(np.column_stack([xi, v / omega]))

    def points(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        basis = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return basis @ self.amplitude.T

    @property
    def gram(self) -> np.ndarray:
        return self.amplitude @ self.amplitude.T

    @property
    def coefficients(self) -> tuple[float, float, float]:
        """``(p, q, r)`` with ``p x**2 + 2 q x y + r y**2 = 1``.

        Raises ``ConicError`` for the degenerate (segment) case.
        """
        g = self.gram
        det = float(np.linalg.det(g))
        if det <= 1e-14 * float(np.trace(g)) ** 2:
            raise ConicError("degenerate conic has no quadric form (flow segment)")
        s = np.linalg.inv(g)
        return float(s[0, 0]), float(s[0, 1]), float(s[1, 1])

    def residual(self, points) -> np.ndarray:
        """Scale-free implicit residual, zero exactly on the curve.

        Uses ``x^T adj(G) x - det G`` with ``G = M M^T`` divided by
        ``trace(G)**2``, which stays finite for the segment case.
        """
        g = self.gram
        p = np.asarray(points, dtype=float)
        x, y = p[..., 0], p[..., 1]
        quad = g[1, 1] * x * x - 2 * g[0, 1] * x * y + g[0, 0] * y * y
        return (quad - np.linalg.det(g)) / np.trace(g) ** 2


def _refine_extremum(func, thetas, values, k: int, maximize: bool) -> float:
    """Golden-section polish of a sampled extremum at index ``k``."""
    sign = -1.0 if maximize else 1.0
    step = thetas[1] - thetas[0]
    mid = thetas[k]
    try:
        res = optimize.minimize_scalar(
            lambda t: sign * func(t),
            bracket=(mid - step, mid, mid + step),
            method="golden",
            tol=1e-12,
        )
        best = sign * res.fun
    except ValueError:
        best = values[k]
    # the sample itself is a valid lower/upper bound
    return max(best, values[k]) if maximize else min(best, values[k])


def arc_conic_tangency_defect(
    table: BilliardTable,
    lam: float,
    ellipse: FlowEllipse,
    samples: int = TANGENCY_SAMPLES,
    tol: float = SNAP_TOL,
) -> float:
    """How far the flow ellipse is from being tangent to ``C_lam``.

    For a non-degenerate conic the conic value ``F`` is sampled along the
    full ellipse; tangency means the range of ``F`` touches zero at one of
    its ends without crossing, so the defect is ``min(|max F|, |min F|)``.
    A transversal crossing or a gap both give a positive defect.

    ``lam = b``: distance from the ellipse to the nearer focus.
    ``lam = a``: the largest ``|x|`` on the ellipse, i.e. zero iff the flow
    collapses onto the minor axis.
    """
    thetas = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    cls = classify_conic(table, lam, tol)
    if cls is ConicClass.DEGENERATE_MINOR_AXIS:
        return float(np.hypot(*ellipse.amplitude[0]))
    if cls is ConicClass.DEGENERATE_FOCAL:
        best = math.inf
        for focus in foci(table):
            dist = lambda t, f=focus: float(np.hypot(*(ellipse.points(t) - f)))
            values = np.hypot(*(ellipse.points(thetas) - focus).T)
            k = int(np.argmin(values))
            best = min(best, _refine_extremum(dist, thetas, values, k, maximize=False))
        return max(best, 0.0)

    def value(t):
        return float(conic_value(table, lam, ellipse.points(t), tol))

    values = conic_value(table, lam, ellipse.points(thetas), tol)
    hi = _refine_extremum(value, thetas, values, int(np.argmax(values)), maximize=True)
    lo = _refine_extremum(value, thetas, values, int(np.argmin(values)), maximize=False)
    return float(min(abs(hi), abs(lo)))
