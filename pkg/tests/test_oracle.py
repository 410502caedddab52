"""Dynamic-programming oracle, strategy enumeration and dispersal checks."""

import numpy as np
import pytest

from memsynth import (GridError, SynthesisError, build_model,
                      compare_feedback_vs_dp, dispersal_equality_check,
                      dp_refinement_tolerance, find_singular_arc,
                      integrate_feedback, integrate_state, random_schedule,
                      sample_switching_curve, solve_dp, strategy_enumeration,
                      value_at)


@pytest.fixture(scope="module")
def cogan():
    return build_model("cogan", a=1.0, b=1.0, e=1.0)


@pytest.fixture(scope="module")
def setup(cogan):
    arc = find_singular_arc(cogan, 40.0)
    curve = sample_switching_curve(cogan, arc, 40.0, np.linspace(3.0, 16.0, 400))
    return arc, curve


@pytest.fixture(scope="module")
def grid(cogan, setup):
    arc, _ = setup
    return solve_dp(cogan, 40.0, arc, n_t=1001, n_m=501)


def test_grid_shape_and_terminal_row(grid):
    assert grid.V.shape == (1001, 501)
    assert np.all(grid.V[-1] == 0.0)
    assert set(np.round(grid.candidates, 12)) == {-1.0, 0.5, 1.0}


def test_value_monotone_in_time(grid):
    # more remaining time can only increase the attainable production
    j = np.searchsorted(grid.m_nodes, 5.0)
    col = grid.V[:, j]
    assert np.all(np.diff(col) <= 1e-12)


def test_value_positive_above_filtration_floor(cogan, grid):
    # playing u=+1 from (0, m0) is one admissible strategy, so V dominates it
    for m0 in (1.0, 5.0, 10.0):
        floor = integrate_state(cogan, 1.0, m0, (0.0, 40.0)).total_cost
        assert value_at(grid, 0.0, m0) >= floor - 5e-3


def test_value_at_range_checks(grid):
    with pytest.raises(GridError, match="outside the grid"):
        value_at(grid, -1.0, 5.0)
    with pytest.raises(GridError, match="outside the grid"):
        value_at(grid, 0.0, 100.0)


def test_solve_dp_argument_validation(cogan):
    with pytest.raises(GridError):
        solve_dp(cogan, 40.0, None, n_t=1, n_m=10)
    with pytest.raises(GridError):
        solve_dp(cogan, 40.0, None, m_min=2.0, m_max=1.0)


def test_refinement_tolerance_and_comparison(cogan, setup):
    arc, curve = setup
    points = [(0.0, m0) for m0 in (1.0, 3.0, 5.0, 7.0)]
    fine, tol_dp = dp_refinement_tolerance(cogan, 40.0, arc, points,
                                           n_t=2001, n_m=1001)
    assert tol_dp > 0
    report = compare_feedback_vs_dp(cogan, arc, curve, fine, points, tol_dp)
    assert report.passed, [r.gap for r in report.rows]


def test_comparison_rejects_unreachable_grid(cogan, setup):
    arc, curve = setup
    small = solve_dp(cogan, 40.0, arc, n_t=101, n_m=51, m_max=20.0)
    with pytest.raises(GridError, match="reachable"):
        compare_feedback_vs_dp(cogan, arc, curve, small, [(0.0, 10.0)], 1.0)


def test_strategy_enumeration_finds_dwell(cogan, setup):
    arc, curve = setup
    res = strategy_enumeration(cogan, arc, 40.0, 10.0)
    assert res.structure == "dwell"
    t_hit, release = res.switch_times
    assert t_hit == pytest.approx(np.log(10.0 / 3.0) + 7.0, abs=1e-6)
    assert release == pytest.approx(16.0, abs=1e-4)
    fb = integrate_feedback(cogan, arc, curve, 40.0, 10.0).total_cost
    assert res.best_cost == pytest.approx(fb, abs=1e-8)
    assert res.family_costs["pure_filtration"] < res.best_cost


def test_strategy_enumeration_below_arc(cogan, setup):
    arc, _ = setup
    res = strategy_enumeration(cogan, arc, 40.0, 1.0)
    # from below the singular mass the search may still reach it by
    # filtration, but never gains from an initial backwash
    assert res.family_costs["one_switch"] <= res.family_costs["pure_filtration"] + 1e-9


def test_random_schedule_reproducible():
    rng = np.random.default_rng(7)
    s1 = random_schedule(rng, 40.0)
    rng = np.random.default_rng(7)
    s2 = random_schedule(rng, 40.0)
    assert s1.breaks == s2.breaks and s1.values == s2.values
    assert all(-1.0 <= v <= 1.0 for v in s1.values)
    assert all(0.0 <= b <= 40.0 for b in s1.breaks)


def test_dispersal_check_refuses_bad_points(cogan, setup):
    arc, curve = setup
    with pytest.raises(SynthesisError, match="not on the curve"):
        dispersal_equality_check(cogan, arc, curve, 40.0, [(5.0, 10.0)])
    # m=4 lies on the transversal (switch) part of the curve
    switch_pt = next(s for s in curve.samples if s.in_curve and s.kind == "switch")
    with pytest.raises(SynthesisError, match="switching point"):
        dispersal_equality_check(cogan, arc, curve, 40.0,
                                 [(switch_pt.T_tilde, switch_pt.m_tilde)])


def test_dispersal_check_reports_both_costs(cogan, setup):
    arc, curve = setup
    pt = next(s for s in curve.samples
              if s.in_curve and s.kind == "dispersal" and s.m_tilde > 8.0)
    rows = dispersal_equality_check(cogan, arc, curve, 40.0,
                                    [(pt.T_tilde, pt.m_tilde)])
    assert len(rows) == 1
    assert np.isfinite(rows[0].J_plus) and np.isfinite(rows[0].J_minus)
    assert rows[0].diff == abs(rows[0].J_plus - rows[0].J_minus)
