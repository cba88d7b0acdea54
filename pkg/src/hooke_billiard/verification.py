"""Property checks for the whole model, run by ``hooke-billiard verify``.

Each check draws from its own generator seeded with ``(seed, index)`` so the
report does not depend on which checks run or in which order.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from .conic_geometry import BilliardTable, foci
from .dynamics import PhasePoint, closed_form_arrays, simulate, simulate_batch
from .foliation import (
    CriticalOrbit,
    EnergyBand,
    HalfLine,
    FomenkoAtom,
    StabilityClass,
    bifurcation_complex,
    classify_level,
    classify_stability,
    count_components_numeric,
    fomenko_graph,
)
from .integrability import (
    caustic_parameters,
    constant_term,
    energy,
    in_billiard_domain,
    lax_L,
    momentum_map,
    probe_lambdas,
)
from .sampling import DEFAULT_SEED, random_table, sample_boundary_states, sample_domain_states

PROFILE_ENV = "HOOKE_BILLIARD_TOL_PROFILE"
PROFILES = {"default": 1.0, "loose": 100.0, "strict": 0.1}

TOLERANCES = {
    "sum_rule": 1e-12,
    "outer_sign": 1e-12,
    "caustic_drift": 1e-8,
    "lax_drift": 1e-10,
    "map_agreement": 1e-9,
    "focal_distance": 1e-6,
    "region": 1e-12,
    "corner": 1e-3,
}


def default_tolerances(profile: str | None = None) -> dict[str, float]:
    """Tolerances scaled by a named profile (env ``HOOKE_BILLIARD_TOL_PROFILE``)."""
    profile = profile or os.environ.get(PROFILE_ENV, "default")
    if profile not in PROFILES:
        raise ValueError(f"unknown tolerance profile {profile!r}; choose from {sorted(PROFILES)}")
    factor = PROFILES[profile]
    return {k: v * factor for k, v in TOLERANCES.items()}


@dataclass
class CheckResult:
    key: str
    criterion: int
    title: str
    passed: bool
    worst: float
    tolerance: float
    samples: int
    wall_time: float = 0.0
    detail: str = ""

    def line(self, timings: bool = False) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (
            f"{status} [{self.criterion:>2}] {self.key:<18} worst={self.worst:.3e} "
            f"tol={self.tolerance:.1e} n={self.samples}"
        )
        if self.detail:
            text += f"  ({self.detail})"
        if timings:
            text += f"  {self.wall_time:.2f}s"
        return text


@dataclass
class VerificationReport:
    seed: int
    fast: bool
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def wall_time(self) -> float:
        return sum(r.wall_time for r in self.results)

    def render(self, timings: bool = False) -> str:
        head = f"verification seed={self.seed} mode={'fast' if self.fast else 'full'}"
        tail = f"overall: {'PASS' if self.passed else 'FAIL'}"
        if timings:
            tail += f" ({self.wall_time:.2f}s)"
        return "\n".join([head, *(r.line(timings) for r in self.results), tail]) + "\n"

    def to_json(self, timings: bool = False) -> str:
        rows = []
        for r in self.results:
            row = asdict(r)
            if not timings:
                row.pop("wall_time")
            rows.append(row)
        return json.dumps({"seed": self.seed, "fast": self.fast, "passed": self.passed, "results": rows}, indent=2)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _tables(rng: np.random.Generator, count: int) -> list[BilliardTable]:
    return [random_table(rng) for _ in range(count)]


def arc_distance(table: BilliardTable, start: PhasePoint, duration: float, point) -> float:
    """Distance from ``point`` to the flow arc of length ``duration`` from ``start``."""
    w = table.omega
    xi, q = np.asarray(start.xi), np.asarray(start.v) / w
    point = np.asarray(point, dtype=float)
    theta_end = w * duration

    def dist(th):
        return float(np.hypot(*(xi * np.cos(th) + q * np.sin(th) - point)))

    grid = np.linspace(0.0, theta_end, 129)
    pts = xi * np.cos(grid)[:, None] + q * np.sin(grid)[:, None]
    d = np.hypot(*(pts - point).T)
    k = int(np.argmin(d))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if hi <= lo:
        return float(d[k])
    res = optimize.minimize_scalar(dist, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    return min(float(res.fun), float(d[k]))


def arcs_cross_focal_segment(table: BilliardTable, xi, v, duration) -> np.ndarray:
    """Whether each arc meets the open segment between the foci."""
    w = table.omega
    theta_end = w * np.asarray(duration)
    y0, qy = xi[..., 1], v[..., 1] / w
    theta0 = np.mod(np.arctan2(-y0, qy), np.pi)
    x_at = xi[..., 0] * np.cos(theta0) + v[..., 0] / w * np.sin(theta0)
    c = math.sqrt(table.focal_parameter)
    return (theta0 < theta_end) & (np.abs(x_at) < c)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def check_sum_rule_and_sign(seed, fast, tol):
    rng = _rng(seed, 1)
    per_table = 1_000 if fast else 10_000
    worst_sum, worst_sign, n = 0.0, -math.inf, 0
    for table in _tables(rng, 10):
        states = sample_domain_states(table, per_table, rng)
        bstates = sample_boundary_states(table, per_table // 10, rng)
        for st in (states, bstates):
            lam1, lam2 = caustic_parameters(table, st.xi, st.v)
            target = table.a + table.b - 2.0 * energy(table, st) / table.sigma
            err = np.abs(lam1 + lam2 - target) / max(1.0, abs(table.a + table.b))
            worst_sum = max(worst_sum, float(err.max()))
            worst_sign = max(worst_sign, float(lam1.max()))
            n += len(lam1)
    return [
        CheckResult("sum_rule", 1, "lambda1 + lambda2 = a + b - 2E/sigma", worst_sum <= tol["sum_rule"],
                    worst_sum, tol["sum_rule"], n),
        CheckResult("outer_sign", 2, "lambda1 <= 0 on the domain", worst_sign <= tol["outer_sign"],
                    worst_sign, tol["outer_sign"], n),
    ]


def check_invariance(seed, fast, tol):
    rng = _rng(seed, 3)
    n_traj, n_bounce = (20, 200) if fast else (100, 1000)
    tables = _tables(rng, 4)
    worst_l, worst_det = 0.0, 0.0
    for i, table in enumerate(tables):
        count = n_traj // len(tables)
        start = sample_boundary_states(table, count, rng)
        run = simulate_batch(table, start.xi, start.v, n_bounce, from_boundary=True)
        l1_0, l2_0 = caustic_parameters(table, start.xi, start.v)
        l1, l2 = caustic_parameters(table, run.xi, run.v_out)
        worst_l = max(worst_l, float(np.abs(l1 - l1_0).max()), float(np.abs(l2 - l2_0).max()))
        states = PhasePoint(run.xi, run.v_out)
        for lam in probe_lambdas(table, 5):
            d0 = np.linalg.det(lax_L(table, start, lam))
            d = np.linalg.det(lax_L(table, states, lam))
            worst_det = max(worst_det, float(np.abs(d - d0).max()))
    n = n_traj * n_bounce
    return [
        CheckResult("caustic_drift", 3, "caustics preserved along trajectories",
                    worst_l <= tol["caustic_drift"], worst_l, tol["caustic_drift"], n),
        CheckResult("lax_drift", 3, "det L(lambda) preserved at 5 probes",
                    worst_det <= tol["lax_drift"], worst_det, tol["lax_drift"], n),
    ]


def check_closed_form_map(seed, fast, tol):
    rng = _rng(seed, 4)
    total = 1_000 if fast else 10_000
    worst, n = 0.0, 0
    for table in _tables(rng, 5):
        states = sample_boundary_states(table, total // 5, rng)
        for lo in range(0, len(states), 1000):
            st = states[lo:lo + 1000]
            geo = simulate_batch(table, st.xi, st.v, 1, from_boundary=True)
            xi_next, v_next, _ = closed_form_arrays(table, st.xi, st.v)
            worst = max(worst, float(np.abs(geo.xi[0] - xi_next).max()),
                        float(np.abs(geo.v_out[0] - v_next).max()))
            n += len(st)
    return [CheckResult("map_agreement", 4, "closed-form map vs flow + impact + reflection",
                        worst <= tol["map_agreement"], worst, tol["map_agreement"], n)]


def check_focal_alternation(seed, fast, tol):
    rng = _rng(seed, 5)
    n_traj, n_bounce = (10, 8) if fast else (50, 12)
    worst, worst_lam, n = 0.0, 0.0, 0
    tables = _tables(rng, 5)
    for k in range(n_traj):
        table = tables[k % len(tables)]
        f1, f2 = foci(table)
        vmax = 1.5 * math.sqrt(table.sigma * (table.a + table.b))
        while True:
            ang = rng.uniform(0, 2 * np.pi)
            v = rng.uniform(0.2, 1.0) * vmax * np.array([math.cos(ang), math.sin(ang)])
            if constant_term(table, f1, v) < 0 and abs(math.sin(ang)) > 1e-3:
                break
        start = PhasePoint(f1, v)
        worst_lam = max(worst_lam, abs(caustic_parameters(table, f1, v)[1] - table.b))
        traj = simulate(table, start, n_bounce)
        for j, arc in enumerate(traj.arcs):
            target = f1 if j % 2 == 0 else f2
            worst = max(worst, arc_distance(table, arc.start, arc.duration, target))
            n += 1
    return [CheckResult("focal_alternation", 5, "arcs pass through alternating foci",
                        worst <= tol["focal_distance"], worst, tol["focal_distance"], n,
                        detail=f"|lambda2-b|<={worst_lam:.1e}")]


def check_focal_dichotomy(seed, fast, tol):
    rng = _rng(seed, 6)
    per_kind = 10 if fast else 50
    n_bounce = 20
    table_list = _tables(rng, 5)
    failures, arcs = 0, 0
    for kind in ("hyperbola", "ellipse"):
        have = 0
        while have < per_kind:
            table = table_list[have % len(table_list)]
            st = sample_domain_states(table, 200, rng)
            _, lam2 = caustic_parameters(table, st.xi, st.v)
            margin = 0.02 * table.b
            if kind == "hyperbola":
                pick = (lam2 > table.b + margin) & (lam2 < table.a - margin)
            else:
                pick = (lam2 > margin) & (lam2 < table.b - margin)
            idx = np.flatnonzero(pick)[: min(5, per_kind - have)]
            if len(idx) == 0:
                continue
            start = st[idx]
            run = simulate_batch(table, start.xi, start.v, n_bounce + 1)
            # the first arc starts mid-chord, so only bounce-to-bounce arcs count
            crosses = arcs_cross_focal_segment(table, run.xi[:-1], run.v_out[:-1], run.durations[1:])
            expected = kind == "hyperbola"
            failures += int(np.count_nonzero(crosses != expected))
            arcs += crosses.size
            have += len(idx)
    return [CheckResult("focal_dichotomy", 6, "every or no arc crosses the focal segment",
                        failures == 0, float(failures), 0.0, arcs)]


EXPECTED_GRAPHS = {
    EnergyBand.EQ_SIGMA_B_OVER_2: ({"A": 1}, {}),
    EnergyBand.BETWEEN_B_AND_A: ({"A": 1, "T": 1}, {("A", "T"): 1}),
    EnergyBand.EQ_SIGMA_A_OVER_2: ({"A": 1, "8": 1}, {("8", "A"): 1}),
    EnergyBand.BETWEEN_A_AND_AB: ({"A": 1, "B": 1, "T": 2}, {("A", "B"): 1, ("B", "T"): 2}),
    EnergyBand.ABOVE_AB: ({"A": 3, "B": 1}, {("A", "B"): 3}),
}


def graph_mismatches(table: BilliardTable) -> int:
    """Differences between computed graphs and the expected band structures."""
    e_b, e_a, e_ab = table.band_energies()
    energies = [e_b, 0.5 * (e_b + e_a), e_a, 0.5 * (e_a + e_ab), e_ab, 3 * e_ab]
    bad = 0
    for E in energies:
        g = fomenko_graph(table, E)
        atoms, edges = EXPECTED_GRAPHS[g.band]
        bad += dict(g.atom_counts()) != atoms
        bad += dict(g.edge_labels()) != edges
        top = g.band is EnergyBand.ABOVE_AB
        for e in g.edges:
            marks = (e.r, e.epsilon)
            bad += marks != ((Fraction(0), 1) if top else (None, None))
        if top:
            b_ids = tuple(v.id for v in g.vertices if v.atom is FomenkoAtom.B)
            bad += [(f.vertices, f.n) for f in g.families] != [(b_ids, -1)]
        else:
            bad += len(g.families) != 0
    return bad


def check_fomenko_graphs(seed, fast, tol):
    rng = _rng(seed, 7)
    tables = [BilliardTable(2.0, 1.0, 1.0), *_tables(rng, 2)]
    bad = sum(graph_mismatches(t) for t in tables)
    return [CheckResult("fomenko_graphs", 7, "five band structures and marks", bad == 0,
                        float(bad), 0.0, 6 * len(tables))]


REGIMES = ("hyperbolic_low", "hyperbolic_high", "elliptic_mid", "elliptic_high", "T_hyperbolic", "T_elliptic")


def sample_level(table: BilliardTable, regime: str, rng: np.random.Generator) -> tuple[float, float]:
    """A random ``(E, lambda2)`` in one of six regimes, kept off separatrices."""
    a, b, s = table.a, table.b, table.sigma
    e_b, e_a, e_ab = table.band_energies()
    u = lambda lo, hi: lo + (hi - lo) * rng.uniform(0.05, 0.95)  # noqa: E731
    lam_t = lambda E: a + b - 2 * E / s  # noqa: E731
    if regime == "hyperbolic_low":
        E = u(e_b, e_a)
        return E, u(lam_t(E), a)
    if regime == "hyperbolic_high":
        E = u(e_a, 2 * e_ab)
        return E, u(b, a)
    if regime == "elliptic_mid":
        E = u(e_a, e_ab)
        return E, u(lam_t(E), b)
    if regime == "elliptic_high":
        E = u(e_ab, 2 * e_ab)
        return E, u(0.0, b)
    if regime == "T_hyperbolic":
        E = u(e_b, e_a)
        return E, lam_t(E)
    if regime == "T_elliptic":
        E = u(e_a, e_ab)
        return E, lam_t(E)
    raise ValueError(regime)


def check_component_counts(seed, fast, tol):
    rng = _rng(seed, 8)
    n_levels = 30 if fast else 100
    tables = _tables(rng, 4)
    bad = 0
    for k in range(n_levels):
        table = tables[k % len(tables)]
        regime = REGIMES[k % len(REGIMES)]
        E, lam2 = sample_level(table, regime, rng)
        bad += count_components_numeric(table, E, lam2) != classify_level(table, E, lam2).components
    return [CheckResult("component_counts", 8, "numeric component counts match the atoms",
                        bad == 0, float(bad), 0.0, n_levels)]


def corner_states(table: BilliardTable) -> list[PhasePoint]:
    """States mapping exactly to the three marked corners of the diagram."""
    s, a, b = table.sigma, table.a, table.b
    return [
        PhasePoint([0.0, 0.0], [0.0, math.sqrt(s * b)]),
        PhasePoint([0.0, 0.0], [math.sqrt(s * a), 0.0]),
        PhasePoint([0.0, math.sqrt(b)], [math.sqrt(s * a), 0.0]),
    ]


def check_diagram(seed, fast, tol):
    rng = _rng(seed, 9)
    per_table = 2_000 if fast else 10_000
    tables = [BilliardTable(2.0, 1.0, 1.0), *_tables(rng, 2)]
    worst_region, worst_corner, n = 0.0, 0.0, 0
    for table in tables:
        inv = momentum_map(table, sample_domain_states(table, per_table, rng))
        scale = max(1.0, table.a + table.b)
        viol = np.maximum.reduce([
            -inv.lambda2,
            inv.lambda2 - table.a,
            (table.a + table.b) - (inv.lambda2 + 2 * inv.E / table.sigma),
        ]) / scale
        worst_region = max(worst_region, float(viol.max()))
        n += per_table
        for base, line in zip(corner_states(table), _corner_lines(table)):
            pts = []
            while len(pts) < 20:
                xi = base.xi + rng.normal(scale=1e-5, size=(64, 2))
                v = base.v + rng.normal(scale=1e-5, size=(64, 2))
                st = PhasePoint(xi, v)
                ok = in_billiard_domain(table, st)
                if ok.any():
                    inv_c = momentum_map(table, st[ok])
                    pts.extend(zip(inv_c.E, inv_c.lambda2))
            pts = np.array(pts)
            d = np.max(np.abs(pts - np.array(line.endpoint)), axis=1).min()
            worst_corner = max(worst_corner, float(d))
    return [
        CheckResult("diagram_region", 9, "momentum-map images inside the region",
                    worst_region <= tol["region"], worst_region, tol["region"], n),
        CheckResult("diagram_corners", 9, "corner points approached",
                    worst_corner <= tol["corner"], worst_corner, tol["corner"], 3 * len(tables)),
    ]


def _corner_lines(table: BilliardTable) -> tuple[HalfLine, ...]:
    from .foliation import bifurcation_set

    return bifurcation_set(table)


def check_complex_and_stability(seed, fast, tol):
    rng = _rng(seed, 10)
    tables = [BilliardTable(2.0, 1.0, 1.0), *_tables(rng, 2)]
    bad = 0
    expected = {
        CriticalOrbit.MINOR_AXIS: StabilityClass.STABLE,
        CriticalOrbit.BOUNDARY_LIMIT: StabilityClass.STABLE,
        CriticalOrbit.MAJOR_AXIS: StabilityClass.UNSTABLE,
    }
    for t in tables:
        cplx = bifurcation_complex(t)
        e_b, e_a, e_ab = t.band_energies()
        bad += len(cplx.cells) != 3
        bad += cplx.gluing != HalfLine(t.b, e_a, FomenkoAtom.B)
        bad += any(c.glued_along != cplx.gluing for c in cplx.cells)
        bad += not cplx.is_on_border(2 * e_ab, t.a)
        bad += not cplx.is_on_border(2 * e_ab, 0.0)
        bad += cplx.is_on_border(2 * e_ab, t.b)
        bad += len(cplx.cells_at(2 * e_ab, t.b)) != 3
        for orbit, want in expected.items():
            bad += classify_stability(t, orbit) is not want
    return [CheckResult("complex_stability", 10, "three cells on one half-line; stability",
                        bad == 0, float(bad), 0.0, len(tables))]


CHECKS = (
    check_sum_rule_and_sign,
    check_invariance,
    check_closed_form_map,
    check_focal_alternation,
    check_focal_dichotomy,
    check_fomenko_graphs,
    check_component_counts,
    check_diagram,
    check_complex_and_stability,
)


def run_verification(
    seed: int = DEFAULT_SEED,
    fast: bool = False,
    tolerances: dict[str, float] | None = None,
    profile: str | None = None,
) -> VerificationReport:
    tol = default_tolerances(profile)
    if tolerances:
        unknown = set(tolerances) - set(tol)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        tol.update(tolerances)
    report = VerificationReport(seed, fast)
    for check in CHECKS:
        t0 = time.perf_counter()
        results = check(seed, fast, tol)
        elapsed = time.perf_counter() - t0
        for r in results:
            r.wall_time = elapsed / len(results)
        report.results.extend(results)
    return report
