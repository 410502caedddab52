"""Trajectory integration, events, adjoint reconstruction and PMP audit."""

import numpy as np
import pytest

from memsynth import (PiecewiseControl, SimulationError, build_model,
                      find_singular_arc, integrate_adjoint,
                      integrate_backwash_then_feedback, integrate_feedback,
                      integrate_state, pmp_audit, sample_switching_curve)


@pytest.fixture(scope="module")
def cogan():
    return build_model("cogan", a=1.0, b=1.0, e=1.0)


@pytest.fixture(scope="module")
def cogan_setup(cogan):
    arc = find_singular_arc(cogan, 40.0)
    curve = sample_switching_curve(cogan, arc, 40.0, np.linspace(3.0, 16.0, 200))
    return arc, curve


def test_constant_filtration_analytic(cogan):
    # dm/dt = 1/(1+m) integrates to m(t) = sqrt((1+m0)^2 + 2t) - 1
    traj = integrate_state(cogan, 1.0, 2.0, (0.0, 12.0))
    ref = np.sqrt((1 + 2.0) ** 2 + 2 * traj.t) - 1
    assert np.max(np.abs(traj.m - ref)) < 1e-9
    # production = integral g dm/dt dt = m(T) - m0 for this model
    assert traj.total_cost == pytest.approx(traj.m[-1] - 2.0, abs=1e-9)


def test_constant_backwash_analytic(cogan):
    # dm/dt = -m/(1+m): implicit solution t = ln(m0/m) + m0 - m
    traj = integrate_state(cogan, -1.0, 5.0, (0.0, 3.0))
    t_ref = np.log(5.0 / traj.m) + 5.0 - traj.m
    assert np.max(np.abs(traj.t - t_ref)) < 1e-9
    assert traj.total_cost < 0  # backwashing consumes fluid


def test_piecewise_control_breakpoints(cogan):
    ctrl = PiecewiseControl([(0.0, -1.0), (2.0, 1.0), (5.0, 0.25)])
    assert ctrl(1.9) == -1.0 and ctrl(2.0) == 1.0 and ctrl(7.0) == 0.25
    traj = integrate_state(cogan, ctrl, 4.0, (0.0, 8.0))
    kinds = [ev.kind for ev in traj.events]
    assert kinds == ["switch_up", "switch_down"]
    assert traj.events[0].t == pytest.approx(2.0)
    assert traj.events[1].t == pytest.approx(5.0)
    # breakpoints are exact trajectory nodes
    for b in (2.0, 5.0):
        assert np.min(np.abs(traj.t - b)) < 1e-12


def test_input_validation(cogan):
    with pytest.raises(SimulationError, match="must be >= 0"):
        integrate_state(cogan, 1.0, -0.5, (0.0, 1.0))
    with pytest.raises(SimulationError, match="outside"):
        integrate_state(cogan, 1.5, 1.0, (0.0, 1.0))


def test_feedback_trajectory_structure(cogan, cogan_setup):
    arc, curve = cogan_setup
    traj = integrate_feedback(cogan, arc, curve, 40.0, 10.0)
    events = {ev.kind: ev.t for ev in traj.events}
    # backwash from m=10 reaches the arc at ln(10/3) + 7, dwells until 16
    assert events["hit_singular"] == pytest.approx(np.log(10.0 / 3.0) + 7.0,
                                                   abs=1e-8)
    assert events["leave_singular"] == pytest.approx(16.0, abs=1e-9)
    assert traj.m[-1] == pytest.approx(7.0, abs=1e-8)
    assert traj.total_cost == pytest.approx(3.770530595030548, abs=1e-9)
    # controls appear in the order -1, u_bar, +1
    assert [s.u for s in traj.segments] == [-1.0, arc.u_bar, 1.0]


def test_feedback_below_arc_pins_then_releases(cogan, cogan_setup):
    arc, curve = cogan_setup
    traj = integrate_feedback(cogan, arc, curve, 40.0, 0.5)
    kinds = [ev.kind for ev in traj.events]
    assert kinds == ["hit_singular", "leave_singular"]
    assert traj.m[-1] == pytest.approx(7.0, abs=1e-8)


def test_feedback_outside_region_is_filtration(cogan, cogan_setup):
    arc, curve = cogan_setup
    traj = integrate_feedback(cogan, arc, curve, 40.0, 10.0, t0=20.0)
    assert [s.u for s in traj.segments] == [1.0]
    assert not traj.events


def test_adjoint_and_audit(cogan, cogan_setup):
    arc, curve = cogan_setup
    traj = integrate_feedback(cogan, arc, curve, 40.0, 10.0)
    integrate_adjoint(cogan, traj)
    assert traj.lam[-1] == pytest.approx(0.0, abs=1e-14)
    # Hamiltonian is conserved and equals g(m(T)) since lambda(T) = 0
    assert np.max(np.abs(traj.H - cogan.g(traj.m[-1]))) < 1e-8
    # on the singular dwell the adjoint sits at its stationary value
    sing = next(s for s in traj.segments if s.singular)
    assert np.max(np.abs(traj.lam[sing.i0:sing.i1 + 1] - arc.lambda_bar)) < 1e-8
    rep = pmp_audit(traj)
    assert rep.sign_violation == 0.0
    assert rep.hamiltonian_drift < 1e-8
    assert rep.max_lambda_interior < 0.0
    assert rep.singular_phi_max < 1e-9


def test_audit_requires_adjoint(cogan):
    traj = integrate_state(cogan, 1.0, 1.0, (0.0, 5.0))
    with pytest.raises(SimulationError, match="adjoint not filled"):
        pmp_audit(traj)


def test_forced_backwash_from_curve_point(cogan, cogan_setup):
    arc, curve = cogan_setup
    # start on the curve at a dispersal mass; forcing u=-1 re-enters the
    # backwash region and exits through the switch part of the curve
    from memsynth import switching_time
    m0 = 10.0
    t0, _ = switching_time(cogan, arc, 40.0, m0)
    traj = integrate_backwash_then_feedback(cogan, arc, curve, 40.0, m0, t0=t0)
    kinds = [ev.kind for ev in traj.events]
    assert "hit_curve" in kinds
    assert traj.segments[0].u == -1.0
    assert traj.segments[-1].u == 1.0
