"""Exact harmonic flow inside the table and the bounce map it induces.

Between impacts the particle obeys ``xi'' = -sigma * xi``, so with
``w = sqrt(sigma)``

    xi(t) = xi cos(wt) + (v/w) sin(wt),

an arc of an origin-centred ellipse.  Boundary states are always stored with
the *outgoing* (post-reflection) velocity.

Array functions in this module broadcast over leading axes: positions and
velocities have shape ``(..., 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conic_geometry import BilliardTable, FlowEllipse
from .errors import DomainError, SingularMapError

SCAN_SAMPLES = 1024
_THETA_GRID = np.linspace(0.0, np.pi, SCAN_SAMPLES + 1)
_GRID_TRIG = (np.cos(_THETA_GRID[1:-1]), np.sin(_THETA_GRID[1:-1]))
BISECTION_STEPS = 48
#: |xi^T A xi - 1| below this marks a start state as a boundary state
BOUNDARY_TOL = 1e-9
#: a sampled maximum of the boundary residual above -TOUCH_TOL counts as a touch
TOUCH_TOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """Position ``xi`` and velocity ``v``; either a single state or a stack."""

    xi: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        v = np.array(self.v, dtype=float)
        if xi.shape != v.shape or xi.shape[-1:] != (2,):
            raise ValueError(f"xi and v must share a shape (..., 2); got {xi.shape}, {v.shape}")
        xi.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "v", v)

    @property
    def angular_momentum(self):
        return self.xi[..., 0] * self.v[..., 1] - self.xi[..., 1] * self.v[..., 0]

    def reversed(self) -> "PhasePoint":
        return PhasePoint(self.xi, -self.v)

    def __len__(self):
        if self.xi.ndim == 1:
            raise TypeError("single PhasePoint has no len()")
        return self.xi.shape[0]

    def __getitem__(self, idx) -> "PhasePoint":
        return PhasePoint(self.xi[idx], self.v[idx])


def flow(table: BilliardTable, state: PhasePoint, t) -> PhasePoint:
    """Free harmonic evolution for time ``t`` (no reflections)."""
    w = table.omega
    t = np.asarray(t, dtype=float)[..., None]
    c, s = np.cos(w * t), np.sin(w * t)
    xi = state.xi * c + state.v / w * s
    v = -state.xi * w * s + state.v * c
    return PhasePoint(xi, v)


# ---------------------------------------------------------------------------
# bounce detection
# ---------------------------------------------------------------------------


def _orbit(xi, v, w, theta):
    """Position and d/dtheta of the orbit at phase angles ``theta`` (N, K)."""
    c, s = np.cos(theta), np.sin(theta)
    x0, y0 = xi[:, 0:1], xi[:, 1:2]
    px, py = v[:, 0:1] / w, v[:, 1:2] / w
    x, y = x0 * c + px * s, y0 * c + py * s
    dx, dy = -x0 * s + px * c, -y0 * s + py * c
    return x, y, dx, dy


def _orbit_quadratic(table, xi, v):
    """Coefficients of ``xi(theta)^T A xi(theta) = P c^2 + 2 Q c s + R s^2``."""
    dA = table.diag_A
    p = xi
    q = v / table.omega
    return (
        (p * dA * p).sum(-1)[:, None],
        (p * dA * q).sum(-1)[:, None],
        (q * dA * q).sum(-1)[:, None],
    )


def _residual(coeffs, theta, deflate, trig=None):
    """Boundary residual ``xi(theta)^T A xi(theta) - 1``.

    Rows with ``deflate`` set start on the boundary; for them the residual is
    divided by ``sin(theta)`` to remove the departure root at ``theta = 0``.
    ``trig`` optionally supplies precomputed ``(cos, sin)`` of ``theta``.
    """
    P, Q, R = coeffs
    c, s = trig if trig is not None else (np.cos(theta), np.sin(theta))
    f = P * (c * c) + 2.0 * Q * (c * s) + R * (s * s) - 1.0
    if np.any(deflate):
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(deflate[:, None], f / s, f)
    return f


def _polish(table, xi, v, theta):
    """Guarded Newton steps on the undeflated residual."""
    for _ in range(3):
        x, y, dx, dy = _orbit(xi, v, table.omega, theta[:, None])
        f = (x * x / table.a + y * y / table.b - 1.0)[:, 0]
        df = 2.0 * (x * dx / table.a + y * dy / table.b)[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        cand = theta - step
        xc, yc, _, _ = _orbit(xi, v, table.omega, cand[:, None])
        fc = (xc * xc / table.a + yc * yc / table.b - 1.0)[:, 0]
        ok = np.isfinite(step) & (np.abs(step) < 1e-6) & (np.abs(fc) < np.abs(f))
        theta = np.where(ok, cand, theta)
    return theta


def _bisect(coeffs, lo, hi, deflate):
    """Vectorised bisection for a residual negative at ``lo``, nonnegative at ``hi``."""
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        pos = _residual(coeffs, mid[:, None], deflate)[:, 0] >= 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)


def hit_angles(table: BilliardTable, xi, v, from_boundary=None) -> np.ndarray:
    """Phase angle ``w*t`` of the next boundary impact, one per row.

    The residual has period pi in the phase angle, so one scan of
    ``[0, pi]`` on ``SCAN_SAMPLES`` points brackets the first sign change;
    bisection and a guarded Newton polish follow.  Rows with no impact get
    ``nan``.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = xi.shape[0]
    if from_boundary is None:
        from_boundary = np.abs(table.boundary_value(xi) - 1.0) <= BOUNDARY_TOL
    from_boundary = np.broadcast_to(np.asarray(from_boundary, dtype=bool), (n,))
    w = table.omega
    dA = table.diag_A

    # slope of the residual at departure: 2 (xi, A v) / w
    gamma = (xi * dA * v).sum(-1) / w
    beta = 0.5 * (1.0 - (v * dA * v).sum(-1) / table.sigma)
    speed_scale = np.sqrt((v * dA * v).sum(-1) / table.sigma + 1.0)
    grazing = from_boundary & (np.abs(gamma) <= 1e-13 * speed_scale)

    theta_grid = _THETA_GRID
    vals = np.empty((n, SCAN_SAMPLES + 1))
    coeffs = _orbit_quadratic(table, xi, v)
    vals[:, 1:-1] = _residual(coeffs, None, from_boundary, _GRID_TRIG)
    f_end = coeffs[0][:, 0] - 1.0
    vals[:, 0] = np.where(from_boundary, 2.0 * gamma, f_end)
    vals[:, -1] = np.where(from_boundary, -2.0 * gamma, f_end)

    result = np.full(n, np.nan)
    outgoing_ok = ~from_boundary | (gamma <= 1e-13 * speed_scale)

    # tangential departure: the orbit touches the boundary again at -xi
    graze_in = grazing & (beta > 0)
    result[graze_in] = np.pi

    todo = outgoing_ok & ~grazing & (vals[:, 0] < 0)
    nonneg = vals >= 0.0
    nonneg[:, 0] = False
    has_change = nonneg.any(axis=1)
    first = np.argmax(nonneg, axis=1)

    # interior starts that only touch the boundary between samples
    touch = todo & ~has_change & ~from_boundary
    if np.any(touch):
        idx = np.flatnonzero(touch)
        plain = np.zeros(len(idx), bool)
        sub = tuple(c[idx] for c in coeffs)
        k = np.argmax(vals[idx], axis=1)
        left = theta_grid[np.maximum(k - 1, 0)]
        lo_t, hi_t = left, theta_grid[np.minimum(k + 1, SCAN_SAMPLES)]
        g = (math.sqrt(5) - 1) / 2
        for _ in range(80):
            m1 = hi_t - g * (hi_t - lo_t)
            m2 = lo_t + g * (hi_t - lo_t)
            f1 = _residual(sub, m1[:, None], plain)[:, 0]
            f2 = _residual(sub, m2[:, None], plain)[:, 0]
            up = f2 > f1
            lo_t = np.where(up, m1, lo_t)
            hi_t = np.where(up, hi_t, m2)
        tmax = 0.5 * (lo_t + hi_t)
        fmax = _residual(sub, tmax[:, None], plain)[:, 0]
        crossing = fmax > 0
        if np.any(crossing):
            cross_coeffs = tuple(c[crossing] for c in sub)
            root = _bisect(cross_coeffs, left[crossing], tmax[crossing], plain[crossing])
            tmax[crossing] = root
        hit = fmax >= -TOUCH_TOL
        result[idx[hit]] = tmax[hit]

    bracket = todo & has_change
    if np.any(bracket):
        idx = np.flatnonzero(bracket)
        k = first[idx]
        xs, vs = xi[idx], v[idx]
        sub = tuple(c[idx] for c in coeffs)
        root = _bisect(sub, theta_grid[k - 1], theta_grid[k], from_boundary[idx])
        result[idx] = _polish(table, xs, vs, root)
    return result


def next_hit(table: BilliardTable, state: PhasePoint) -> tuple[float, PhasePoint]:
    """Time to the next impact and the state just before it.

    Starting on the boundary the departure root is excluded; a tangential
    departure is treated as non-reflecting and the orbit runs on to its next
    contact.  Raises ``DomainError`` if the orbit never reaches the
    boundary.
    """
    xi = np.asarray(state.xi, dtype=float)
    if xi.ndim != 1:
        raise ValueError("next_hit takes a single state; use hit_angles for stacks")
    theta = hit_angles(table, xi[None], state.v[None])[0]
    if not np.isfinite(theta):
        raise DomainError(
            f"state not in billiard domain: no boundary impact from xi={xi.tolist()}, "
            f"v={state.v.tolist()}"
        )
    t = theta / table.omega
    return float(t), flow(table, state, t)


def reflect(table: BilliardTable, hit: PhasePoint, tol: float = 1e-12) -> PhasePoint:
    """Billiard reflection at a boundary point: flip the normal component."""
    xi, u = hit.xi, hit.v
    n = xi * table.diag_A
    un = (u * n).sum(-1)
    scale = np.linalg.norm(u, axis=-1) * np.linalg.norm(n, axis=-1)
    if np.any(un < -tol * np.maximum(scale, 1.0)):
        raise DomainError("not an incoming state: velocity already points into the table")
    nn = (n * n).sum(-1)
    return PhasePoint(xi, u - (2.0 * un / nn)[..., None] * n)


# ---------------------------------------------------------------------------
# closed-form bounce map
# ---------------------------------------------------------------------------


def map_scalars(table: BilliardTable, xi, v):
    """``(v,Av)``, ``(xi,Av)`` and the normaliser ``nu`` of the bounce map."""
    dA = table.diag_A
    vAv = (v * dA * v).sum(-1)
    xAv = (xi * dA * v).sum(-1)
    nu = np.sqrt(4.0 * table.sigma * xAv**2 + (table.sigma - vAv) ** 2)
    return vAv, xAv, nu


def closed_form_arrays(table: BilliardTable, xi, v, tol: float = 1e-12):
    """Vectorised bounce map; returns ``(xi_next, v_next, mu)``.

    ``mu`` is the reflection coefficient at the new point, computed from the
    arrival velocity ``u`` as ``-2 (u, A xi~) / (xi~, A^2 xi~)``.
    """
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v, dtype=float)
    s = table.sigma
    dA = table.diag_A
    vAv, xAv, nu = map_scalars(table, xi, v)
    if np.any(nu <= tol * (s + vAv)):
        raise SingularMapError("singular map point: nu vanishes")
    inv_nu = (1.0 / nu)[..., None]
    xi_next = -inv_nu * (s * xi - vAv[..., None] * xi + 2.0 * xAv[..., None] * v)
    u = -inv_nu * (s * v - vAv[..., None] * v - 2.0 * s * xAv[..., None] * xi)
    # the formulas fix (cos, sin) of the flight angle up to a common sign; the
    # flight angle lies in (0, pi], i.e. sin >= 0, iff (xi, A v) <= 0
    flip = np.where(xAv > 0, -1.0, 1.0)[..., None]
    xi_next = flip * xi_next
    u = flip * u
    n = dA * xi_next
    mu = -2.0 * (u * n).sum(-1) / (n * n).sum(-1)
    v_next = u + mu[..., None] * n
    return xi_next, v_next, mu


def closed_form_map(table: BilliardTable, state: PhasePoint, tol: float = 1e-12) -> PhasePoint:
    """Next outgoing boundary state by the explicit algebraic bounce map."""
    xi_next, v_next, _ = closed_form_arrays(table, state.xi, state.v, tol)
    return PhasePoint(xi_next, v_next)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    start: PhasePoint
    duration: float
    end: PhasePoint  # pre-reflection state at the impact
    flow_ellipse: FlowEllipse

    def sample(self, table: BilliardTable, count: int = 64) -> PhasePoint:
        return flow(table, self.start, np.linspace(0.0, self.duration, count))


@dataclass
class Trajectory:
    table: BilliardTable
    arcs: list[Arc] = field(default_factory=list)
    bounce_points: list[PhasePoint] = field(default_factory=list)

    @property
    def hit_times(self) -> np.ndarray:
        """Absolute time of each impact, measured from the initial state."""
        return np.cumsum([arc.duration for arc in self.arcs])


def simulate(table: BilliardTable, initial: PhasePoint, n_bounces: int) -> Trajectory:
    """Chain ``next_hit`` and ``reflect`` for ``n_bounces`` impacts."""
    if n_bounces < 0:
        raise ValueError("n_bounces must be nonnegative")
    traj = Trajectory(table)
    state = initial
    for k in range(n_bounces):
        try:
            t, hit = next_hit(table, state)
            out = reflect(table, hit)
        except DomainError as exc:
            raise DomainError(f"bounce {k}: {exc}") from exc
        ellipse = FlowEllipse.from_state(state.xi, state.v, table.omega)
        traj.arcs.append(Arc(state, t, hit, ellipse))
        traj.bounce_points.append(out)
        state = out
    return traj


@dataclass
class BatchRun:
    """Stacked result of ``simulate_batch``; axis 0 is the bounce index."""

    xi: np.ndarray  # (n_bounces, N, 2) impact points
    v_out: np.ndarray  # outgoing velocities
    v_in: np.ndarray  # arrival velocities
    durations: np.ndarray  # (n_bounces, N) flight times


def simulate_batch(
    table: BilliardTable, xi, v, n_bounces: int, from_boundary=None
) -> BatchRun:
    """Run many trajectories side by side with the same solver as ``next_hit``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = xi.shape[0]
    out = BatchRun(
        np.empty((n_bounces, n, 2)),
        np.empty((n_bounces, n, 2)),
        np.empty((n_bounces, n, 2)),
        np.empty((n_bounces, n)),
    )
    fb = from_boundary
    for k in range(n_bounces):
        theta = hit_angles(table, xi, v, fb)
        bad = ~np.isfinite(theta)
        if np.any(bad):
            raise DomainError(
                f"bounce {k}: state not in billiard domain "
                f"(trajectories {np.flatnonzero(bad)[:5].tolist()})"
            )
        t = theta / table.omega
        hit = flow(table, PhasePoint(xi, v), t)
        refl = reflect(table, hit)
        out.xi[k], out.v_in[k], out.v_out[k], out.durations[k] = hit.xi, hit.v, refl.v, t
        xi, v = refl.xi, refl.v
        fb = np.ones(n, bool)
    return out
