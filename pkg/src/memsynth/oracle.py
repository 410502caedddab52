"""Brute-force verification of the synthesis.

Three independent cross-checks:

* a backward dynamic-programming value function on a (t, m) grid, with
  an empirically estimated grid tolerance,
* twin simulations from dispersal points (both strategies must tie),
* exhaustive search over the admissible strategy structures (pure
  filtration, one backwash-to-filtration switch, backwash plus singular
  dwell) with golden-section refinement of the switch times.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .models import FoulingModel
from .simulate import PiecewiseControl, integrate_backwash_then_feedback, \
    integrate_feedback, integrate_state
from .synthesis import SingularArc, SwitchingCurve, SynthesisError, switching_time

__all__ = [
    "ValueGrid",
    "ComparisonReport",
    "GridError",
    "solve_dp",
    "value_at",
    "dp_refinement_tolerance",
    "compare_feedback_vs_dp",
    "dispersal_equality_check",
    "strategy_enumeration",
    "random_schedule",
]


class GridError(RuntimeError):
    pass


@dataclass
class ValueGrid:
    """DP value function V(t_k, m_j) = max attainable remaining production."""

    t_nodes: np.ndarray
    m_nodes: np.ndarray
    V: np.ndarray          # shape (n_t, n_m)
    policy: np.ndarray     # int index into candidates, shape (n_t, n_m)
    candidates: np.ndarray
    horizon: float

    def policy_value(self, k, j):
        return float(self.candidates[self.policy[k, j]])


def solve_dp(model: FoulingModel, horizon, arc: Optional[SingularArc] = None,
             n_t=4001, n_m=2001, m_min=1e-3, m_max=60.0,
             candidates=None) -> ValueGrid:
    """Backward value recursion on a uniform-time, log-spaced-mass grid.

    Explicit Euler transitions with monotone cubic interpolation in m;
    states stepping below m_min are clamped there (detachment vanishes
    near the clean membrane, so outward flow is negligible).  The
    singular control u_bar joins the candidate set {-1, +1} only when the
    arc is active.
    """
    if n_t < 2 or n_m < 2 or not (0 < m_min < m_max):
        raise GridError("need n_t, n_m >= 2 and 0 < m_min < m_max")
    if candidates is None:
        candidates = [-1.0, 1.0]
        if arc is not None and arc.active:
            candidates.append(arc.u_bar)
    candidates = np.asarray(sorted(candidates), dtype=float)

    t_nodes = np.linspace(0.0, horizon, n_t)
    m_nodes = np.geomspace(m_min, m_max, n_m)
    dt = t_nodes[1] - t_nodes[0]
    der = model.derived()
    fm = np.array([der.f_minus(m) for m in m_nodes])
    fp = np.array([der.f_plus(m) for m in m_nodes])
    g = np.array([model.g(m) for m in m_nodes])

    m_next = np.empty((len(candidates), n_m))
    payoff = np.empty((len(candidates), n_m))
    for i, u in enumerate(candidates):
        # clamped at both ends; the compare step checks that tested initial
        # conditions keep their reachable set inside [m_min, m_max]
        m_next[i] = np.clip(m_nodes + dt * (fm + u * fp), m_min, m_max)
        payoff[i] = u * g * dt

    V = np.zeros((n_t, n_m))
    policy = np.zeros((n_t, n_m), dtype=np.int8)
    vals = np.empty((len(candidates), n_m))
    for k in range(n_t - 2, -1, -1):
        interp = PchipInterpolator(m_nodes, V[k + 1], extrapolate=False)
        for i in range(len(candidates)):
            vals[i] = payoff[i] + interp(m_next[i])
        policy[k] = np.argmax(vals, axis=0)
        V[k] = np.take_along_axis(vals, policy[k][None, :], axis=0)[0]
    return ValueGrid(t_nodes=t_nodes, m_nodes=m_nodes, V=V, policy=policy,
                     candidates=candidates, horizon=float(horizon))


def value_at(grid: ValueGrid, t0, m0) -> float:
    """Evaluate V at (t0, m0): monotone cubic in m, linear in t."""
    if not (grid.t_nodes[0] <= t0 <= grid.t_nodes[-1]):
        raise GridError(f"t0={t0} outside the grid")
    if not (grid.m_nodes[0] <= m0 <= grid.m_nodes[-1]):
        raise GridError(f"m0={m0} outside the grid")
    k = min(int(np.searchsorted(grid.t_nodes, t0, side="right") - 1),
            len(grid.t_nodes) - 2)
    v0 = float(PchipInterpolator(grid.m_nodes, grid.V[k])(m0))
    v1 = float(PchipInterpolator(grid.m_nodes, grid.V[k + 1])(m0))
    w = (t0 - grid.t_nodes[k]) / (grid.t_nodes[k + 1] - grid.t_nodes[k])
    return (1.0 - w) * v0 + w * v1


def dp_refinement_tolerance(model, horizon, arc, points, n_t=4001, n_m=2001,
                            m_min=1e-3, m_max=60.0):
    """Empirical grid-error estimate for the DP oracle.

    Solves the recursion at the requested resolution and at half
    resolution; for a first-order scheme the value change under halving
    approximates the fine-grid truncation error, so the reported
    tolerance is 3x the largest change over the test points plus a small
    floor.  Returns (fine_grid, tol_dp).
    """
    fine = solve_dp(model, horizon, arc, n_t=n_t, n_m=n_m,
                    m_min=m_min, m_max=m_max)
    coarse = solve_dp(model, horizon, arc, n_t=(n_t - 1) // 2 + 1,
                      n_m=(n_m - 1) // 2 + 1, m_min=m_min, m_max=m_max)
    diff = max(abs(value_at(fine, t0, m0) - value_at(coarse, t0, m0))
               for t0, m0 in points)
    return fine, 3.0 * diff + 1e-6


@dataclass
class ComparisonRow:
    t0: float
    m0: float
    J_feedback: float
    V_dp: float

    @property
    def gap(self):
        return self.J_feedback - self.V_dp


@dataclass
class ComparisonReport:
    rows: List[ComparisonRow] = field(default_factory=list)
    tol_dp: float = math.nan

    @property
    def passed(self):
        return all(abs(r.gap) <= self.tol_dp for r in self.rows)


def compare_feedback_vs_dp(model, arc, curve, grid: ValueGrid, points,
                           tol_dp) -> ComparisonReport:
    """Exact closed-loop simulation vs DP value at each (t0, m0)."""
    horizon = grid.horizon
    f1_max = model.f1(0.0)  # f1 is decreasing, so this bounds dm/dt
    rep = ComparisonReport(tol_dp=tol_dp)
    for t0, m0 in points:
        bound = m0 + (horizon - t0) * f1_max
        if grid.m_nodes[-1] < bound:
            raise GridError(f"m_max={grid.m_nodes[-1]} below the reachable "
                            f"bound {bound:.3g} from (t0={t0}, m0={m0})")
        traj = integrate_feedback(model, arc, curve, horizon, m0, t0=t0)
        rep.rows.append(ComparisonRow(t0=float(t0), m0=float(m0),
                                      J_feedback=traj.total_cost,
                                      V_dp=value_at(grid, t0, m0)))
    return rep


@dataclass
class DispersalRow:
    t: float
    m: float
    J_plus: float
    J_minus: float

    @property
    def diff(self):
        return abs(self.J_plus - self.J_minus)


def dispersal_equality_check(model, arc, curve, horizon, points):
    """Twin simulation from dispersal points: filtration-to-the-end vs
    backwash-until-arc-or-switching-locus.  Both costs must agree.

    Each (t, m) is re-classified from the closed formulas before use;
    non-dispersal inputs are refused.
    """
    der = model.derived()
    rows = []
    for t, m in points:
        T_tilde, m_T = switching_time(model, arc, horizon, m)
        if not (T_tilde > 0.0) or abs(T_tilde - t) > 1e-6:
            raise SynthesisError(f"point (t={t}, m={m}) is not on the curve")
        dT = (1.0 / model.f1(m)
              - der.dgamma(m) / (model.dg(m_T) * model.f1(m_T)))
        if 1.0 + dT * model.f2(m) > 0.0:
            raise SynthesisError(f"point (t={t}, m={m}) is a switching point, "
                                 "not a dispersal point")
        J_plus = integrate_state(model, 1.0, m, (t, horizon)).total_cost
        J_minus = integrate_backwash_then_feedback(model, arc, curve, horizon,
                                                   m, t0=t).total_cost
        rows.append(DispersalRow(t=float(t), m=float(m),
                                 J_plus=J_plus, J_minus=J_minus))
    return rows


def _refine_max(fun, lo, hi, n_grid=41):
    """Coarse grid then bounded golden-style refinement of a 1-d maximum."""
    ts = np.linspace(lo, hi, n_grid)
    vals = [fun(t) for t in ts]
    i = int(np.argmax(vals))
    a = ts[max(i - 1, 0)]
    b = ts[min(i + 1, n_grid - 1)]
    if b <= a:
        return float(ts[i]), float(vals[i])
    res = minimize_scalar(lambda t: -fun(t), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-9})
    best_t = float(res.x)
    best_v = float(-res.fun)
    if vals[i] > best_v:
        return float(ts[i]), float(vals[i])
    return best_t, best_v


@dataclass
class EnumerationResult:
    best_cost: float
    structure: str
    switch_times: tuple
    family_costs: dict


def strategy_enumeration(model, arc, horizon, m0, k_switches=2) -> EnumerationResult:
    """Search the admissible strategy structures from (0, m0).

    Families: pure filtration; backwash then filtration with one free
    switch time; backwash to the singular mass, dwell there until a free
    release time, then filtration.  Switch times are optimized by grid
    search plus golden-section refinement.
    """
    if k_switches not in (0, 1, 2):
        raise ValueError("k_switches must be 0, 1 or 2")
    family_costs = {}
    J_plus = integrate_state(model, 1.0, m0, (0.0, horizon)).total_cost
    family_costs["pure_filtration"] = J_plus
    best = EnumerationResult(J_plus, "pure_filtration", (), family_costs)

    if k_switches >= 1:
        def one_switch(ts):
            if ts <= 0.0:
                return J_plus
            ctrl = PiecewiseControl([(0.0, -1.0), (ts, 1.0)])
            return integrate_state(model, ctrl, m0, (0.0, horizon)).total_cost

        ts, J1 = _refine_max(one_switch, 0.0, horizon)
        family_costs["one_switch"] = J1
        if J1 > best.best_cost:
            best = EnumerationResult(J1, "one_switch", (ts,), family_costs)

    if k_switches >= 2 and arc is not None and arc.active and m0 > arc.m_bar:
        down = integrate_state(model, -1.0, m0, (0.0, horizon))
        idx = np.nonzero(down.m <= arc.m_bar)[0]
        if idx.size:
            # invert m(t) = m_bar on the integrator's dense output
            i = idx[0]
            if i > 0:
                dense = next(s.dense for s in down.segments
                             if s.i0 <= i - 1 and i <= s.i1)
                t_hit = float(brentq(lambda t: dense(t)[0] - arc.m_bar,
                                     down.t[i - 1], down.t[i], xtol=1e-13))
                J_down = float(dense(t_hit)[1])
            else:
                t_hit, J_down = float(down.t[0]), 0.0
            rate = arc.u_bar * model.g(arc.m_bar)

            def dwell(s):
                tail = integrate_state(model, 1.0, arc.m_bar, (s, horizon)).total_cost
                return J_down + rate * (s - t_hit) + tail

            s, J2 = _refine_max(dwell, t_hit, horizon)
            family_costs["dwell"] = J2
            if J2 > best.best_cost:
                best = EnumerationResult(J2, "dwell", (t_hit, s), family_costs)
    best.family_costs = family_costs
    return best


def random_schedule(rng, horizon, max_segments=5) -> PiecewiseControl:
    """Random admissible piecewise-constant control over [0, horizon]."""
    k = int(rng.integers(1, max_segments + 1))
    breaks = np.sort(rng.uniform(0.0, horizon, size=k - 1))
    values = rng.uniform(-1.0, 1.0, size=k)
    pairs = [(0.0, values[0])] + [(b, v) for b, v in zip(breaks, values[1:])]
    return PiecewiseControl(pairs)
