"""Geometric objects of the optimal filtration/backwash synthesis.

Computes, for a fouling model and horizon T:

* the singular arc (m_bar, u_bar, lambda_bar) with its exit data
  (m_bar_T, T_bar),
* the switching curve: the time Ttilde(m) at which the optimal control
  flips from backwash (-1) to filtration (+1) at mass level m, with each
  point classified as a genuine switch or a dispersal point (two optimal
  strategies of equal cost),
* the optimal feedback law u[t, m] in {-1, u_bar, +1}.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import quad

from .models import FoulingModel, ModelError, g_inverse

__all__ = [
    "SingularArc",
    "CurveSample",
    "SwitchingCurve",
    "FeedbackLaw",
    "SynthesisError",
    "find_singular_arc",
    "switching_time",
    "sample_switching_curve",
    "feedback",
    "cost_difference_delta",
]

#: absolute tolerance for root bracketing (scaled by local magnitude)
TOL_ROOT = 1e-10
#: tolerance passed to adaptive quadrature
TOL_QUAD = 1e-12
#: half-width of the "on the singular arc" detection band (mass units)
BAND_SING = 1e-9


class SynthesisError(RuntimeError):
    """Synthesis assumptions violated or branch unsupported."""


def _inv_f1_integral(model, m_lo, m_hi):
    """Time to flow from m_lo up to m_hi under pure filtration (u=+1)."""
    val, _ = quad(lambda m: 1.0 / model.f1(m), m_lo, m_hi,
                  epsabs=TOL_QUAD, epsrel=TOL_QUAD, limit=200)
    return val


@dataclass(frozen=True)
class SingularArc:
    """Singular locus m = m_bar and its exit data.

    The arc is *active* when f_minus(m_bar) < 0; only then do the exit
    mass ``m_bar_T`` and last-optimal time ``T_bar`` exist.  ``T_bar``
    may be <= 0, meaning the arc is never played over [0, T].
    """

    m_bar: float
    u_bar: float
    lambda_bar: float
    f_minus_at_m_bar: float
    horizon: float
    m_bar_T: Optional[float] = None
    T_bar: Optional[float] = None

    @property
    def active(self):
        return self.f_minus_at_m_bar < 0.0


def find_singular_arc(model: FoulingModel, horizon, m_max=50.0,
                      n_samples=2000) -> SingularArc:
    """Locate the unique positive root of psi and build the singular arc.

    The root is bracketed by a sign change of psi on a grid over
    (0, m_max] and refined by bisection; a missing or non-unique sign
    change means the standing sign assumption on psi fails.
    """
    der = model.derived()
    ms = np.linspace(0.0, m_max, n_samples)[1:]
    psi = np.array([der.psi(m) for m in ms])
    sign = np.sign(psi)
    flips = np.nonzero(np.diff(sign) != 0)[0]
    if len(flips) == 0:
        raise SynthesisError("H2 violated: psi has no sign change on the grid")
    if len(flips) > 1:
        raise SynthesisError("H2 violated: multiple roots of psi on the grid")
    i = flips[0]
    if not (sign[i] < 0 < sign[i + 1]):
        raise SynthesisError("H2 violated: psi does not cross from - to +")
    lo, hi = float(ms[i]), float(ms[i + 1])
    while hi - lo > 0.1 * TOL_ROOT * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if der.psi(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    m_bar = 0.5 * (lo + hi)

    fm, fp = der.f_minus(m_bar), der.f_plus(m_bar)
    u_bar = -fm / fp
    lambda_bar = -model.g(m_bar) / fp
    if fm >= 0.0:
        return SingularArc(m_bar=m_bar, u_bar=u_bar, lambda_bar=lambda_bar,
                           f_minus_at_m_bar=fm, horizon=horizon)
    m_bar_T = g_inverse(model, der.gamma(m_bar))
    T_bar = horizon - _inv_f1_integral(model, m_bar, m_bar_T)
    return SingularArc(m_bar=m_bar, u_bar=u_bar, lambda_bar=lambda_bar,
                       f_minus_at_m_bar=fm, horizon=horizon,
                       m_bar_T=m_bar_T, T_bar=T_bar)


def switching_time(model: FoulingModel, arc: SingularArc, horizon, m_tilde):
    """Return (Ttilde, m_T) for the switch candidate at mass m_tilde.

    m_T is the terminal mass of the pure-filtration trajectory through the
    switch point (conserved flux level: g(m_T) = gamma(m_tilde)).  When
    gamma(m_tilde) <= 0 no finite m_T exists; (-inf, inf) is returned as
    a "no switch at this level" sentinel.
    """
    if m_tilde < arc.m_bar - BAND_SING:
        raise SynthesisError(f"m_tilde={m_tilde} below the singular mass {arc.m_bar}")
    if not arc.active:
        raise SynthesisError("switching curve undefined: singular arc inactive "
                             "(f_minus(m_bar) >= 0)")
    gam = model.derived().gamma(m_tilde)
    if gam <= 0.0:
        return -math.inf, math.inf
    m_T = g_inverse(model, gam)
    return horizon - _inv_f1_integral(model, m_tilde, m_T), m_T


@dataclass(frozen=True)
class CurveSample:
    m_tilde: float
    T_tilde: float
    m_T: float
    dT_tilde: float
    kind: str  # "switch" | "dispersal" | "outside"

    @property
    def in_curve(self):
        return self.T_tilde > 0.0


@dataclass
class SwitchingCurve:
    """Sampled switching curve with per-point switch/dispersal labels.

    Samples with T_tilde <= 0 are retained but labelled "outside" (no
    switch occurs at that mass level within [0, T]).  Membership tests of
    the backwash region never interpolate these samples; they re-evaluate
    Ttilde on demand (the curve need not be monotone and may be
    disconnected).
    """

    samples: List[CurveSample] = field(default_factory=list)

    @property
    def nonempty(self):
        return any(s.in_curve for s in self.samples)

    def kinds_present(self):
        return sorted({s.kind for s in self.samples if s.in_curve})


def sample_switching_curve(model: FoulingModel, arc: SingularArc, horizon,
                           m_grid) -> SwitchingCurve:
    """Evaluate the switching curve on an ordered mass grid (>= m_bar).

    Each in-curve sample is labelled "switch" when 1 + Ttilde'(m)*f2(m) > 0
    (the backwash flow crosses the curve transversally) and "dispersal"
    otherwise.  Ttilde' comes from the closed formula
    1/f1(m) - gamma'(m) / (g'(m_T) f1(m_T)).
    """
    if not arc.active:
        raise SynthesisError("switching curve undefined: singular arc inactive")
    der = model.derived()
    samples = []
    for m_tilde in np.atleast_1d(np.asarray(m_grid, dtype=float)):
        T_tilde, m_T = switching_time(model, arc, horizon, m_tilde)
        if not math.isfinite(T_tilde):
            samples.append(CurveSample(float(m_tilde), T_tilde, m_T,
                                       math.nan, "outside"))
            continue
        dT = (1.0 / model.f1(m_tilde)
              - der.dgamma(m_tilde) / (model.dg(m_T) * model.f1(m_T)))
        if T_tilde <= 0.0:
            kind = "outside"
        elif 1.0 + dT * model.f2(m_tilde) > 0.0:
            kind = "switch"
        else:
            kind = "dispersal"
        samples.append(CurveSample(float(m_tilde), T_tilde, m_T, dT, kind))
    return SwitchingCurve(samples=samples)


@dataclass(frozen=True)
class FeedbackLaw:
    """Optimal feedback u[t, m]: total on [0, T] x (0, inf).

    -1 inside the backwash region (m > m_bar and t < Ttilde(m)),
    u_bar on the singular arc band while t < T_bar, +1 otherwise.  When
    the arc is inactive or the switching curve is empty the law is
    identically +1.
    """

    model: FoulingModel
    arc: SingularArc
    curve: Optional[SwitchingCurve]
    horizon: float

    def __call__(self, t, m):
        return feedback(self.model, self.arc, self.curve, self.horizon, t, m)


def feedback(model, arc, curve, horizon, t, m):
    """Evaluate the optimal feedback control at (t, m)."""
    if not (0.0 <= t <= horizon):
        raise SynthesisError(f"time {t} outside [0, {horizon}]")
    if not arc.active or curve is None or not curve.nonempty:
        return 1.0
    if abs(m - arc.m_bar) <= BAND_SING:
        return arc.u_bar if t < arc.T_bar else 1.0
    if m > arc.m_bar:
        T_tilde, _ = switching_time(model, arc, horizon, m)
        if t < T_tilde:
            return -1.0
    return 1.0


def cost_difference_delta(model: FoulingModel, arc: SingularArc, horizon,
                          m_terminal) -> float:
    """Cost of exiting the singular arc early, as a function of m(T).

    delta(m) = integral_{m_bar_T}^{m} (g + alpha_bar)/f1, with
    alpha_bar = g(m_bar) f_minus(m_bar) / f_plus(m_bar).  delta(m_bar_T)=0
    and delta < 0 beyond, so leaving the arc before T_bar only loses
    production.
    """
    if not arc.active:
        raise SynthesisError("delta undefined: singular arc inactive")
    if m_terminal < arc.m_bar_T - BAND_SING:
        raise SynthesisError(f"m_terminal={m_terminal} below m_bar_T={arc.m_bar_T}")
    der = model.derived()
    alpha_bar = model.g(arc.m_bar) * der.f_minus(arc.m_bar) / der.f_plus(arc.m_bar)
    val, _ = quad(lambda m: (model.g(m) + alpha_bar) / model.f1(m),
                  arc.m_bar_T, m_terminal,
                  epsabs=TOL_QUAD, epsrel=TOL_QUAD, limit=200)
    return val
