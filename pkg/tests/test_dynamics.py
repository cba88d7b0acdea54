import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hooke_billiard import (
    BilliardTable,
    DomainError,
    PhasePoint,
    SingularMapError,
    closed_form_map,
    energy,
    flow,
    foci,
    next_hit,
    reflect,
    simulate,
    simulate_batch,
)
from hooke_billiard.integrability import caustic_parameters, constant_term
from hooke_billiard.sampling import random_table, sample_boundary_states, sample_domain_states
from hooke_billiard.verification import arc_distance, arcs_cross_focal_segment

SQ2 = math.sqrt(2.0)
finite = st.floats(-3.0, 3.0)


def test_flow_example(table):
    out = flow(table, PhasePoint([0, 0], [2, 0]), math.pi / 4)
    np.testing.assert_allclose(out.xi, [SQ2, 0], atol=1e-15)
    np.testing.assert_allclose(out.v, [SQ2, 0], atol=1e-15)


@given(finite, finite, finite, finite, st.floats(0.1, 4.0))
def test_flow_identity_and_period(x, y, vx, vy, sigma):
    t = BilliardTable(2.0, 1.0, sigma)
    s = PhasePoint([x, y], [vx, vy])
    same = flow(t, s, 0.0)
    np.testing.assert_array_equal(same.xi, s.xi)
    np.testing.assert_array_equal(same.v, s.v)
    period = 2 * math.pi / t.omega
    back = flow(t, s, period)
    np.testing.assert_allclose(back.xi, s.xi, atol=1e-12)
    np.testing.assert_allclose(back.v, s.v, atol=1e-12)


def test_next_hit_from_centre(table):
    t, hit = next_hit(table, PhasePoint([0, 0], [2, 0]))
    assert t == pytest.approx(math.pi / 4, abs=1e-14)
    np.testing.assert_allclose(hit.xi, [SQ2, 0], atol=1e-14)
    np.testing.assert_allclose(hit.v, [SQ2, 0], atol=1e-14)


def test_next_hit_from_vertex(table):
    t, hit = next_hit(table, PhasePoint([SQ2, 0], [-SQ2, 0]))
    assert t == pytest.approx(math.pi / 2, abs=1e-14)
    np.testing.assert_allclose(hit.xi, [-SQ2, 0], atol=1e-14)
    np.testing.assert_allclose(hit.v, [-SQ2, 0], atol=1e-14)


def test_next_hit_out_of_domain(table):
    with pytest.raises(DomainError, match="state not in billiard domain"):
        next_hit(table, PhasePoint([0, 0], [1, 0]))


def test_reflect_examples(table):
    out = reflect(table, PhasePoint([-SQ2, 0], [-SQ2, 0]))
    np.testing.assert_allclose(out.v, [SQ2, 0], atol=1e-15)
    out = reflect(table, PhasePoint([0, 1], [0.4, 0.7]))
    np.testing.assert_allclose(out.v, [0.4, -0.7], atol=1e-15)
    tangential = PhasePoint([SQ2 * math.cos(0.3), math.sin(0.3)], [-SQ2 * math.sin(0.3), math.cos(0.3)])
    np.testing.assert_allclose(reflect(table, tangential).v, tangential.v, atol=1e-15)


def test_reflect_rejects_outgoing(table):
    with pytest.raises(DomainError, match="not an incoming state"):
        reflect(table, PhasePoint([0, 1], [0.4, -0.7]))


def test_reflect_preserves_speed(table, rng):
    ang = rng.uniform(0, 2 * np.pi, 200)
    xi = table.boundary_point(ang)
    v = rng.normal(size=(200, 2))
    normal = xi * table.diag_A
    v = np.where((np.sum(v * normal, -1) < 0)[:, None], -v, v)
    out = reflect(table, PhasePoint(xi, v))
    np.testing.assert_allclose(np.hypot(*out.v.T), np.hypot(*v.T), rtol=1e-14)


def test_closed_form_vertex_example(table):
    out = closed_form_map(table, PhasePoint([SQ2, 0], [-SQ2, 0]))
    np.testing.assert_allclose(out.xi, [-SQ2, 0], atol=1e-14)
    np.testing.assert_allclose(out.v, [SQ2, 0], atol=1e-14)


def test_closed_form_minor_axis(table):
    w_out = -1.3
    out = closed_form_map(table, PhasePoint([0, 1], [0, w_out]))
    np.testing.assert_allclose(out.xi, [0, -1], atol=1e-14)
    np.testing.assert_allclose(out.v, [0, -w_out], atol=1e-14)


def test_closed_form_singular(table):
    with pytest.raises(SingularMapError, match="singular map point"):
        closed_form_map(table, PhasePoint([0, 1], [SQ2, 0]))


def test_closed_form_matches_geometry(rng):
    for _ in range(5):
        t = random_table(rng)
        st_ = sample_boundary_states(t, 200, rng)
        geo = simulate_batch(t, st_.xi, st_.v, 1, from_boundary=True)
        for k in range(len(st_)):
            s = st_[k]
            _, hit = next_hit(t, s)
            ref = reflect(t, hit)
            out = closed_form_map(t, s)
            np.testing.assert_allclose(out.xi, ref.xi, atol=1e-9)
            np.testing.assert_allclose(out.v, ref.v, atol=1e-9)
            np.testing.assert_allclose(geo.v_out[0, k], ref.v, atol=1e-9)


def test_simulate_minor_axis(table):
    traj = simulate(table, PhasePoint([0, 0], [0, SQ2]), 4)
    ys = [p.xi[1] for p in traj.bounce_points]
    np.testing.assert_allclose([p.xi[0] for p in traj.bounce_points], 0, atol=1e-14)
    np.testing.assert_allclose(ys, [1, -1, 1, -1], atol=1e-12)


def test_simulate_major_axis(table):
    traj = simulate(table, PhasePoint([0, 0], [2, 0]), 4)
    xs = [p.xi[0] for p in traj.bounce_points]
    np.testing.assert_allclose(xs, [SQ2, -SQ2, SQ2, -SQ2], atol=1e-12)
    np.testing.assert_allclose([p.xi[1] for p in traj.bounce_points], 0, atol=1e-14)


def test_simulate_zero_bounces(table):
    traj = simulate(table, PhasePoint([0.1, 0.2], [1.0, 1.5]), 0)
    assert traj.arcs == [] and traj.bounce_points == []


def test_simulate_reports_bounce(table):
    with pytest.raises(DomainError, match="bounce 0"):
        simulate(table, PhasePoint([0, 0], [0.5, 0]), 3)


def random_run(rng, n=20):
    t = random_table(rng)
    return t, simulate(t, sample_domain_states(t, 1, rng)[0], n)


def test_energy_conserved(rng):
    for _ in range(10):
        t, traj = random_run(rng)
        e0 = energy(t, traj.arcs[0].start)
        for arc in traj.arcs:
            for s in (arc.start, arc.end, arc.sample(t, 16)):
                assert np.all(np.abs(energy(t, s) - e0) <= 1e-12 * e0)


def test_arcs_on_flow_ellipse(rng):
    for _ in range(10):
        t, traj = random_run(rng)
        for arc in traj.arcs:
            pts = arc.sample(t, 64).xi
            assert np.abs(arc.flow_ellipse.residual(pts)).max() <= 1e-10
            assert np.all(t.contains(pts, 1e-12))


def test_reversibility(rng):
    for _ in range(10):
        t = random_table(rng)
        start = sample_boundary_states(t, 1, rng)[0]
        n = 25
        fwd = simulate(t, start, n)
        last = fwd.arcs[-1].end
        back = simulate(t, PhasePoint(last.xi, -last.v), n)
        expected = [start.xi] + [p.xi for p in fwd.bounce_points[:-1]]
        got = [p.xi for p in back.bounce_points][::-1]
        np.testing.assert_allclose(got, expected, atol=1e-7)
        np.testing.assert_allclose(back.arcs[-1].end.v, -start.v, atol=1e-7)


def test_batch_matches_scalar(rng):
    t = random_table(rng)
    st_ = sample_domain_states(t, 8, rng)
    run = simulate_batch(t, st_.xi, st_.v, 10)
    for k in range(len(st_)):
        traj = simulate(t, st_[k], 10)
        np.testing.assert_allclose(run.xi[:, k], [p.xi for p in traj.bounce_points], atol=1e-12)
        np.testing.assert_allclose(run.durations[:, k], [a.duration for a in traj.arcs], atol=1e-12)


def test_hit_times_cumulative(table):
    traj = simulate(table, PhasePoint([0, 0], [0, SQ2]), 3)
    np.testing.assert_allclose(np.diff(traj.hit_times), math.pi / 2, atol=1e-12)


def test_focal_alternation(table, rng):
    f1, f2 = foci(table)
    for _ in range(5):
        ang = rng.uniform(0.1, np.pi - 0.1)
        v = 1.6 * np.array([math.cos(ang), math.sin(ang)])
        assert constant_term(table, f1, v) < 0
        traj = simulate(table, PhasePoint(f1, v), 8)
        for j, arc in enumerate(traj.arcs):
            target = f1 if j % 2 == 0 else f2
            assert arc_distance(table, arc.start, arc.duration, target) <= 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_focal_segment_dichotomy(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng)
    s = sample_domain_states(t, 1, rng)[0]
    _, lam2 = caustic_parameters(t, s.xi, s.v)
    if min(abs(lam2 - t.b), abs(lam2 - t.a), abs(lam2)) < 1e-3:
        return
    run = simulate_batch(t, s.xi[None], s.v[None], 12)
    crosses = arcs_cross_focal_segment(t, run.xi[:-1], run.v_out[:-1], run.durations[1:])
    assert np.all(crosses) if lam2 > t.b else not np.any(crosses)


def test_phase_point_is_read_only():
    p = PhasePoint([1.0, 2.0], [3.0, 4.0])
    with pytest.raises(ValueError):
        p.xi[0] = 5.0
    assert p.angular_momentum == pytest.approx(1 * 4 - 2 * 3)
