import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hooke_billiard import (
    BilliardTable,
    ConicClass,
    ConicError,
    FlowEllipse,
    PhasePoint,
    arc_conic_tangency_defect,
    caustics,
    classify_conic,
    conic_value,
    foci,
    simulate,
)
from hooke_billiard.sampling import random_table, sample_domain_states


@pytest.mark.parametrize(
    "lam, expected",
    [
        (1.0, ConicClass.DEGENERATE_FOCAL),
        (0.0, ConicClass.BOUNDARY_ELLIPSE),
        (1.5, ConicClass.HYPERBOLA),
        (-0.5, ConicClass.OUTER_ELLIPSE),
        (0.5, ConicClass.INNER_ELLIPSE),
        (2.0, ConicClass.DEGENERATE_MINOR_AXIS),
    ],
)
def test_classify_examples(table, lam, expected):
    assert classify_conic(table, lam) is expected


def test_classify_snaps_within_tolerance(table):
    assert classify_conic(table, 1.0 + 5e-10) is ConicClass.DEGENERATE_FOCAL
    assert classify_conic(table, -5e-10) is ConicClass.BOUNDARY_ELLIPSE
    assert classify_conic(table, 1.0 + 5e-9) is ConicClass.HYPERBOLA


def test_classify_nearest_snap_wins():
    t = BilliardTable(1.0 + 1e-3, 1.0, 1.0)
    assert classify_conic(t, 1.0 + 4e-4, tol=1e-3) is ConicClass.DEGENERATE_FOCAL
    assert classify_conic(t, 1.0 + 6e-4, tol=1e-3) is ConicClass.DEGENERATE_MINOR_AXIS


def test_classify_rejects_beyond_a(table):
    with pytest.raises(ConicError, match="not a caustic parameter"):
        classify_conic(table, 2.5)


@given(st.floats(0.01, 0.99))
def test_classify_constant_on_open_intervals(u):
    t = BilliardTable(2.0, 1.0, 1.0)
    intervals = [(-10.0, 0.0, ConicClass.OUTER_ELLIPSE), (0.0, 1.0, ConicClass.INNER_ELLIPSE),
                 (1.0, 2.0, ConicClass.HYPERBOLA)]
    for lo, hi, cls in intervals:
        lam = lo + u * (hi - lo)
        assert classify_conic(t, lam) is cls
        # snapping is idempotent
        assert classify_conic(t, lam) is classify_conic(t, lam)


def test_classify_snap_is_idempotent(table):
    for lam in (0.0, 1.0, 2.0):
        cls = classify_conic(table, lam + 1e-10)
        assert classify_conic(table, lam) is cls


@pytest.mark.parametrize(
    "lam, point, expected",
    [(0.0, (math.sqrt(2), 0.0), 0.0), (0.0, (0.0, 0.0), -1.0), (-1.0, (0.0, 0.0), -1.0)],
)
def test_conic_value_examples(table, lam, point, expected):
    assert conic_value(table, lam, point) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_conic_value_degenerate_raises(table, lam):
    with pytest.raises(ConicError, match="degenerate conic has no quadric form"):
        conic_value(table, lam, (0.1, 0.1))


@given(st.floats(-3.0, 0.99), st.floats(0.0, 0.999), st.floats(0.0, 2 * math.pi))
def test_conic_value_negative_inside_ellipse(lam, r, angle):
    t = BilliardTable(2.0, 1.0, 1.0)
    p = r * np.array([math.sqrt(t.a - lam) * math.cos(angle), math.sqrt(t.b - lam) * math.sin(angle)])
    assert conic_value(t, lam, p) < 0


@pytest.mark.parametrize("a, b, c", [(2.0, 1.0, 1.0), (5.0, 1.0, 2.0), (1.0 + 1e-6, 1.0, 1e-3)])
def test_foci(a, b, c):
    f1, f2 = foci(BilliardTable(a, b, 1.0))
    np.testing.assert_allclose(f1, [c, 0.0], rtol=1e-9)
    np.testing.assert_allclose(f2, [-c, 0.0], rtol=1e-9)


@pytest.mark.parametrize(
    "a, b, sigma", [(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (2.0, 0.0, 1.0), (2.0, 1.0, 0.0), (math.inf, 1.0, 1.0)]
)
def test_table_validation(a, b, sigma):
    with pytest.raises(ValueError):
        BilliardTable(a, b, sigma)


UNIT_CIRCLE = FlowEllipse(np.eye(2))


def test_tangency_unit_circle_through_foci(table):
    assert arc_conic_tangency_defect(table, 1.0, UNIT_CIRCLE) <= 1e-12


def test_tangency_table_with_itself(table):
    boundary = FlowEllipse(np.diag([math.sqrt(2), 1.0]))
    assert arc_conic_tangency_defect(table, 0.0, boundary) <= 1e-12


def test_tangency_unit_circle_touches_table(table):
    # inside the table except at (0, +-1), where it touches
    assert arc_conic_tangency_defect(table, 0.0, UNIT_CIRCLE) <= 1e-12


@pytest.mark.parametrize("radius", [0.5, 1.2, 1.6])
def test_tangency_positive_for_gap_or_crossing(table, radius):
    circle = FlowEllipse(radius * np.eye(2))
    assert arc_conic_tangency_defect(table, 0.0, circle) > 1e-3


def brute_force_defect(table, lam, amplitude, n=200_000):
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], -1) @ amplitude.T
    f = pts[:, 0] ** 2 / (table.a - lam) + pts[:, 1] ** 2 / (table.b - lam) - 1
    return min(abs(f.max()), abs(f.min()))


@settings(max_examples=40, deadline=None)
@given(st.floats(-2.0, 0.95), st.floats(0.1, 2.0), st.floats(0.1, 2.0), st.floats(0, math.pi))
def test_tangency_matches_dense_oracle(lam, r1, r2, rot):
    t = BilliardTable(2.0, 1.0, 1.0)
    c, s = math.cos(rot), math.sin(rot)
    amp = np.array([[c, -s], [s, c]]) @ np.diag([r1, r2])
    got = arc_conic_tangency_defect(t, lam, FlowEllipse(amp))
    assert got == pytest.approx(brute_force_defect(t, lam, amp), abs=1e-8)


def test_tangency_circle_oracle(table):
    # origin-centred circles touch C_lam exactly at radius^2 = b - lam or a - lam
    for lam in (-1.0, -0.3, 0.0, 0.4):
        for r2 in (table.b - lam, table.a - lam):
            circle = FlowEllipse(math.sqrt(r2) * np.eye(2))
            assert arc_conic_tangency_defect(table, lam, circle) <= 1e-12


def test_tangency_minor_axis(table):
    segment = FlowEllipse(np.array([[0.0, 0.0], [0.3, 1.0]]))
    assert arc_conic_tangency_defect(table, 2.0, segment) == 0.0
    assert arc_conic_tangency_defect(table, 2.0, UNIT_CIRCLE) == pytest.approx(1.0)


def test_flow_ellipse_residual_and_coefficients():
    ell = FlowEllipse.from_state([1.0, 0.5], [0.2, 1.5], 2.0)
    pts = ell.points(np.linspace(0, 2 * np.pi, 50))
    assert np.abs(ell.residual(pts)).max() < 1e-14
    p, q, r = ell.coefficients
    x, y = pts.T
    np.testing.assert_allclose(p * x * x + 2 * q * x * y + r * y * y, 1.0, rtol=1e-12)
    segment = FlowEllipse.from_state([1.0, 0.0], [2.0, 0.0], 1.0)
    assert np.abs(segment.residual(segment.points(np.linspace(0, 6, 20)))).max() < 1e-14
    with pytest.raises(ConicError):
        segment.coefficients


def test_trajectory_arcs_tangent_to_both_caustics():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        t = random_table(rng)
        start = sample_domain_states(t, 1, rng)[0]
        pair = caustics(t, start)
        for arc in simulate(t, start, 4).arcs:
            for lam in (pair.lambda1, pair.lambda2):
                worst = max(worst, arc_conic_tangency_defect(t, lam, arc.flow_ellipse))
    assert worst <= 1e-6


def test_focal_start_tangent_to_degenerate_caustic(table):
    start = PhasePoint([1.0, 0.0], [0.7, 1.3])
    pair = caustics(table, start)
    assert pair.classes[1] is ConicClass.DEGENERATE_FOCAL
    for arc in simulate(table, start, 3).arcs:
        assert arc_conic_tangency_defect(table, pair.lambda2, arc.flow_ellipse) <= 1e-6
