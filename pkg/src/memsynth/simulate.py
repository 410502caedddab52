"""Trajectory integration for the filtration/backwash system.

State dynamics dm/dt = f_minus(m) + u*f_plus(m) with u in [-1, 1]; the
net production J = integral of u*g(m) dt is co-integrated as an extra
state so the cost carries the same accuracy as the state.

Feedback runs are hybrid: regime boundaries (the switching curve, the
singular-arc band, the release time T_bar) are located by the
integrator's event detection, never by step smearing; on the singular
arc the state is pinned to m_bar exactly (u_bar makes it an exact
equilibrium).  The adjoint is filled in backward along the stored
control record and used to audit the necessary optimality conditions.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .models import FoulingModel
from .synthesis import BAND_SING, SingularArc, SwitchingCurve, SynthesisError, \
    switching_time

__all__ = [
    "Trajectory",
    "Event",
    "Segment",
    "AuditReport",
    "PiecewiseControl",
    "SimulationError",
    "integrate_state",
    "integrate_feedback",
    "integrate_backwash_then_feedback",
    "integrate_adjoint",
    "pmp_audit",
]

RTOL = 1e-10
ATOL = 1e-12


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Event:
    t: float
    kind: str  # switch_up | switch_down | hit_singular | leave_singular | hit_curve
    m: float


@dataclass(frozen=True)
class Segment:
    """Maximal interval with a single control: constant u, or None for a
    generic open-loop callable (stored on the trajectory)."""
    t0: float
    t1: float
    u: Optional[float]
    i0: int  # node index range, inclusive on both ends
    i1: int
    singular: bool = False
    dense: Optional[Callable] = None  # integrator dense output for (m, J)


@dataclass
class Trajectory:
    t: np.ndarray
    m: np.ndarray
    u: np.ndarray
    J: np.ndarray
    segments: List[Segment]
    events: List[Event] = field(default_factory=list)
    control: Optional[Callable] = None  # open-loop u(t) when segments carry None
    lam: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None
    H: Optional[np.ndarray] = None

    @property
    def total_cost(self):
        return float(self.J[-1])

    @property
    def horizon(self):
        return float(self.t[-1])


class PiecewiseControl:
    """Piecewise-constant open-loop control, constant from the left.

    ``pairs`` is a sequence of (t_start, u) rows with increasing t_start;
    the first row applies from the start of the run.
    """

    def __init__(self, pairs):
        pairs = sorted((float(t), float(u)) for t, u in pairs)
        if not pairs:
            raise SimulationError("empty control schedule")
        for _, u in pairs:
            if not (-1.0 <= u <= 1.0):
                raise SimulationError(f"control value {u} outside [-1, 1]")
        self.breaks = [t for t, _ in pairs]
        self.values = [u for _, u in pairs]

    def __call__(self, t):
        i = np.searchsorted(self.breaks, t, side="right") - 1
        return self.values[max(int(i), 0)]


class _Run:
    """Accumulates nodes/segments/events for one trajectory."""

    def __init__(self):
        self.ts, self.ms, self.us, self.Js = [], [], [], []
        self.segments, self.events = [], []

    def add_segment(self, t_nodes, m_nodes, J_nodes, u, singular=False,
                    dense=None):
        i0 = max(len(self.ts) - 1, 0)
        start = 1 if self.ts else 0  # drop the duplicated boundary node
        self.ts.extend(t_nodes[start:])
        self.ms.extend(m_nodes[start:])
        self.Js.extend(J_nodes[start:])
        uval = u if u is not None else math.nan
        if not self.us:
            self.us.append(uval)
        self.us[-1] = uval  # shared node takes the incoming segment's control
        self.us.extend([uval] * (len(t_nodes) - 1))
        self.segments.append(Segment(t_nodes[0], t_nodes[-1], u,
                                     i0, len(self.ts) - 1, singular, dense))

    def finish(self, control=None):
        return Trajectory(t=np.array(self.ts), m=np.array(self.ms),
                          u=np.array(self.us), J=np.array(self.Js),
                          segments=self.segments, events=self.events,
                          control=control)


def _solve_segment(model, u_of_t, t0, t1, m0, J0, events=()):
    der = model.derived()

    def rhs(t, y):
        u = u_of_t(t)
        return [der.f_minus(y[0]) + u * der.f_plus(y[0]), u * model.g(y[0])]

    sol = solve_ivp(rhs, (t0, t1), [m0, J0], method="DOP853",
                    rtol=RTOL, atol=ATOL, events=list(events), dense_output=True)
    if not sol.success:
        raise SimulationError(f"integration failed near t={sol.t[-1]}: {sol.message}")
    return sol


def integrate_state(model: FoulingModel, control, m0, t_span) -> Trajectory:
    """Integrate the state and cost under an open-loop control.

    ``control`` is a constant in [-1, 1], a :class:`PiecewiseControl`, or
    any callable u(t) with values in [-1, 1].  Schedule discontinuities
    are honored exactly by splitting the integration at the breakpoints.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if m0 < 0:
        raise SimulationError(f"initial mass m0={m0} must be >= 0")
    run = _Run()
    if isinstance(control, (int, float)):
        u = float(control)
        if not (-1.0 <= u <= 1.0):
            raise SimulationError(f"control value {u} outside [-1, 1]")
        sol = _solve_segment(model, lambda t: u, t0, t1, m0, 0.0)
        run.add_segment(list(sol.t), list(sol.y[0]), list(sol.y[1]), u,
                        dense=sol.sol)
        return run.finish()
    if isinstance(control, PiecewiseControl):
        cuts = [t for t in control.breaks if t0 < t < t1]
        bounds = [t0] + cuts + [t1]
        m, J = m0, 0.0
        prev_u = None
        for a, b in zip(bounds[:-1], bounds[1:]):
            u = control(0.5 * (a + b))
            sol = _solve_segment(model, lambda t, _u=u: _u, a, b, m, J)
            if prev_u is not None and u != prev_u:
                kind = "switch_up" if u > prev_u else "switch_down"
                run.events.append(Event(a, kind, m))
            run.add_segment(list(sol.t), list(sol.y[0]), list(sol.y[1]), u,
                            dense=sol.sol)
            m, J = sol.y[0][-1], sol.y[1][-1]
            prev_u = u
        return run.finish()
    if callable(control):
        sol = _solve_segment(model, control, t0, t1, m0, 0.0)
        run.add_segment(list(sol.t), list(sol.y[0]), list(sol.y[1]), None,
                        dense=sol.sol)
        traj = run.finish(control=control)
        traj.u = np.array([control(t) for t in traj.t])
        return traj
    raise SimulationError(f"unsupported control specification: {control!r}")


def _curve_event(model, arc, horizon):
    def ev(t, y):
        m = max(y[0], arc.m_bar)
        T_tilde, _ = switching_time(model, arc, horizon, m)
        if not math.isfinite(T_tilde):
            return 1.0
        return t - T_tilde
    ev.terminal = True
    ev.direction = 1
    return ev


def _arc_event(arc, direction):
    def ev(t, y):
        return y[0] - arc.m_bar
    ev.terminal = True
    ev.direction = direction
    return ev


def integrate_feedback(model, arc, curve, horizon, m0, t0=0.0) -> Trajectory:
    """Integrate the closed loop under the optimal feedback law."""
    return _run_feedback(model, arc, curve, horizon, m0, t0,
                         force_backwash=False)


def integrate_backwash_then_feedback(model, arc, curve, horizon, m0, t0=0.0):
    """Force u=-1 initially (even from the curve itself), then follow the
    feedback law after the backwash flow reaches the singular arc or
    crosses the switching curve.  Used to realize the second optimal
    strategy issued from a dispersal point."""
    return _run_feedback(model, arc, curve, horizon, m0, t0,
                         force_backwash=True)


def _run_feedback(model, arc, curve, horizon, m0, t0, force_backwash):
    if not (m0 > 0):
        raise SimulationError(f"initial mass m0={m0} must be > 0")
    if not (0.0 <= t0 < horizon):
        raise SimulationError(f"t0={t0} outside [0, {horizon})")
    law_active = arc.active and curve is not None and curve.nonempty
    run = _Run()
    t, m, J = float(t0), float(m0), 0.0

    if law_active:
        if force_backwash:
            mode = "backwash"
        elif abs(m - arc.m_bar) <= BAND_SING:
            mode = "pinned" if t < arc.T_bar else "plus_final"
        elif m > arc.m_bar and t < switching_time(model, arc, horizon, m)[0]:
            mode = "backwash"
        elif m < arc.m_bar and t < arc.T_bar:
            mode = "plus_watch_arc"
        else:
            mode = "plus_final"
    else:
        mode = "plus_final"

    while t < horizon - 1e-13:
        if mode == "pinned":
            t_end = min(arc.T_bar, horizon)
            tn = np.linspace(t, t_end, 17)
            rate = arc.u_bar * model.g(arc.m_bar)
            run.add_segment(list(tn), [arc.m_bar] * len(tn),
                            list(J + rate * (tn - t)), arc.u_bar, singular=True)
            J += rate * (t_end - t)
            t, m = t_end, arc.m_bar
            if t < horizon:
                run.events.append(Event(t, "leave_singular", arc.m_bar))
            mode = "plus_final"
        elif mode == "backwash":
            evs = [_arc_event(arc, -1), _curve_event(model, arc, horizon)]
            sol = _solve_segment(model, lambda _t: -1.0, t, horizon, m, J, evs)
            run.add_segment(list(sol.t), list(sol.y[0]), list(sol.y[1]), -1.0,
                            dense=sol.sol)
            t, m, J = sol.t[-1], sol.y[0][-1], sol.y[1][-1]
            if sol.t_events[0].size:
                m = arc.m_bar  # pin exactly on arrival
                run.ms[-1] = m
                run.events.append(Event(t, "hit_singular", m))
                mode = "pinned" if t < arc.T_bar else "plus_final"
            elif sol.t_events[1].size:
                run.events.append(Event(t, "hit_curve", m))
                run.events.append(Event(t, "switch_up", m))
                mode = "plus_final"
            else:
                break
        elif mode == "plus_watch_arc":
            evs = [_arc_event(arc, 1)]
            sol = _solve_segment(model, lambda _t: 1.0, t, horizon, m, J, evs)
            run.add_segment(list(sol.t), list(sol.y[0]), list(sol.y[1]), 1.0,
                            dense=sol.sol)
            t, m, J = sol.t[-1], sol.y[0][-1], sol.y[1][-1]
            if sol.t_events[0].size and t < arc.T_bar:
                m = arc.m_bar
                run.ms[-1] = m
                run.events.append(Event(t, "hit_singular", m))
                mode = "pinned"
            else:
                mode = "plus_final"
        else:  # plus_final
            sol = _solve_segment(model, lambda _t: 1.0, t, horizon, m, J)
            run.add_segment(list(sol.t), list(sol.y[0]), list(sol.y[1]), 1.0,
                            dense=sol.sol)
            t, m, J = sol.t[-1], sol.y[0][-1], sol.y[1][-1]
            break
    return run.finish()


def _segment_state_spline(model, traj, seg):
    if seg.dense is not None:
        # clamp: adjoint steps may poke epsilon outside the segment
        lo, hi = seg.t0, seg.t1
        return lambda t: seg.dense(min(max(t, lo), hi))[0]
    tt = traj.t[seg.i0:seg.i1 + 1]
    mm = traj.m[seg.i0:seg.i1 + 1]
    der = model.derived()
    if seg.u is not None:
        dm = np.array([der.f_minus(m) + seg.u * der.f_plus(m) for m in mm])
    else:
        dm = np.array([der.f_minus(m) + traj.control(t) * der.f_plus(m)
                       for t, m in zip(tt, mm)])
    if len(tt) < 2:
        return lambda _t, _m=mm[0]: _m
    return CubicHermiteSpline(tt, mm, dm)


def integrate_adjoint(model: FoulingModel, traj: Trajectory, lambda_T=0.0) -> Trajectory:
    """Fill lam, phi and H along a trajectory by backward integration.

    The adjoint equation is integrated backward from lam(T) = lambda_T
    along the stored state (cubic Hermite interpolation of m(t) within
    each control segment) and the stored control record.
    """
    if traj.t.size < 2:
        raise SimulationError("trajectory too short for adjoint integration")
    der = model.derived()
    lam = np.empty_like(traj.t)
    lam[-1] = lambda_T
    lam_val = lambda_T
    for seg in reversed(traj.segments):
        mspl = _segment_state_spline(model, traj, seg)
        if seg.u is not None:
            u_of_t = lambda _t, _u=seg.u: _u
        else:
            u_of_t = traj.control

        def rhs(t, y):
            m = float(mspl(t))
            u = u_of_t(t)
            return [-y[0] * der.df_minus(m)
                    - u * (y[0] * der.df_plus(m) + model.dg(m))]

        t_nodes = traj.t[seg.i0:seg.i1 + 1]
        if seg.t1 == seg.t0:
            lam[seg.i0:seg.i1 + 1] = lam_val
            continue
        sol = solve_ivp(rhs, (seg.t1, seg.t0), [lam_val], method="DOP853",
                        rtol=1e-12, atol=1e-14, t_eval=t_nodes[::-1])
        if not sol.success:
            raise SimulationError(f"adjoint integration failed: {sol.message}")
        lam[seg.i0:seg.i1 + 1] = sol.y[0][::-1]
        lam_val = sol.y[0][-1]
    traj.lam = lam
    fp = np.array([der.f_plus(m) for m in traj.m])
    fm = np.array([der.f_minus(m) for m in traj.m])
    gg = np.array([model.g(m) for m in traj.m])
    traj.phi = lam * fp + gg
    traj.H = lam * fm + traj.u * traj.phi
    return traj


@dataclass
class AuditReport:
    """Violation magnitudes of the necessary optimality conditions."""

    sign_violation: float        # max |u - sign(phi)| where |phi| > phi_tol
    hamiltonian_drift: float     # max |H(t) - H(T)|
    max_lambda_interior: float   # max lam over t < T (must be < 0)
    singular_phi_max: Optional[float]  # max |phi| on singular segments
    phi_tol: float = 1e-6


def pmp_audit(traj: Trajectory, phi_tol=1e-6) -> AuditReport:
    """Check the bang-bang sign rule, Hamiltonian constancy and adjoint
    negativity along a trajectory with the adjoint filled in."""
    if traj.lam is None:
        raise SimulationError("adjoint not filled; run integrate_adjoint first")
    T = traj.t[-1]
    mask = np.abs(traj.phi) > phi_tol
    sign_violation = 0.0
    if np.any(mask):
        sign_violation = float(np.max(np.abs(traj.u[mask] - np.sign(traj.phi[mask]))))
    drift = float(np.max(np.abs(traj.H - traj.H[-1])))
    interior = traj.t < T - 1e-12
    max_lam = float(np.max(traj.lam[interior])) if np.any(interior) else -math.inf
    sing_idx = []
    for seg in traj.segments:
        if seg.singular:
            sing_idx.extend(range(seg.i0, seg.i1 + 1))
    sing_phi = float(np.max(np.abs(traj.phi[sing_idx]))) if sing_idx else None
    return AuditReport(sign_violation=sign_violation, hamiltonian_drift=drift,
                       max_lambda_interior=max_lam, singular_phi_max=sing_phi,
                       phi_tol=phi_tol)
