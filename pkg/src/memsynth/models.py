"""Fouling models for membrane filtration/backwash dynamics.

A model is the triple (f1, f2, g):

* ``f1(m)`` -- rate of mass attachment during filtration,
* ``f2(m)`` -- rate of mass detachment during backwash,
* ``g(m)``  -- instantaneous flux through the membrane.

Two published parameterizations ship as built-ins:

* ``benyahia``:  f1 = b/(e+m),  f2 = a*m,        g = 1/(e+m)
* ``cogan``:     f1 = b/(e+m),  f2 = a*m/(e+m),  g = 1/(e+m)

all with positive parameters a, b, e.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "FoulingModel",
    "DerivedFunctions",
    "HypothesisReport",
    "ModelError",
    "build_model",
    "check_hypotheses",
    "psi_closed_form_check",
    "g_inverse",
]

BUILTIN_NAMES = ("benyahia", "cogan")

#: default absolute tolerance for root solves (scaled by local magnitude)
TOL_ROOT = 1e-10


class ModelError(ValueError):
    """Invalid model name, parameter or evaluation request."""


def _central_difference(fun, m, rel_step=1e-6):
    h = rel_step * max(1.0, abs(m))
    return (fun(m + h) - fun(m - h)) / (2.0 * h)


@dataclass(frozen=True)
class FoulingModel:
    """Immutable fouling model: rates f1, f2, flux g and their derivatives.

    Safe to share across threads; all evaluations are pure functions of
    (params, m).
    """

    name: str
    params: dict
    f1: Callable[[float], float]
    f2: Callable[[float], float]
    g: Callable[[float], float]
    df1: Callable[[float], float]
    df2: Callable[[float], float]
    dg: Callable[[float], float]

    @property
    def is_builtin(self):
        return self.name in BUILTIN_NAMES

    def derived(self):
        return DerivedFunctions(self)


class DerivedFunctions:
    """Combinations of (f1, f2, g) that drive the optimal synthesis.

    f_minus = (f1 - f2)/2 and f_plus = (f1 + f2)/2 rewrite the dynamics as
    dm/dt = f_minus + u*f_plus.  The function ``psi`` locates the singular
    mass (its unique positive root, when it exists) and ``gamma`` carries
    the conserved flux level used to build the switching curve; the
    identity gamma' = -psi/f_plus**2 links the two.
    """

    def __init__(self, model: FoulingModel):
        self.model = model

    def f_minus(self, m):
        return 0.5 * (self.model.f1(m) - self.model.f2(m))

    def f_plus(self, m):
        return 0.5 * (self.model.f1(m) + self.model.f2(m))

    def df_minus(self, m):
        return 0.5 * (self.model.df1(m) - self.model.df2(m))

    def df_plus(self, m):
        return 0.5 * (self.model.df1(m) + self.model.df2(m))

    def psi(self, m):
        g, dg = self.model.g(m), self.model.dg(m)
        fm, fp = self.f_minus(m), self.f_plus(m)
        dfm, dfp = self.df_minus(m), self.df_plus(m)
        return g * (dfm * fp - fm * dfp) + dg * fp * fm

    def gamma(self, m):
        return -self.model.g(m) * self.f_minus(m) / self.f_plus(m)

    def dgamma(self, m):
        return -self.psi(m) / self.f_plus(m) ** 2


def _require_positive(params, keys):
    for k in keys:
        if k not in params:
            raise ModelError(f"missing parameter {k!r}")
        if not (params[k] > 0):
            raise ModelError(f"parameter {k} must be positive (got {params[k]})")


def build_model(name, f1=None, f2=None, g=None, df1=None, df2=None, dg=None,
                **params) -> FoulingModel:
    """Construct a fouling model.

    ``name`` is ``"benyahia"``, ``"cogan"`` (parameters a, b, e, all > 0,
    exact analytic derivatives) or ``"custom"`` with user callables f1, f2,
    g and optional derivatives (central differences with relative step 1e-6
    are used for any derivative not supplied).
    """
    if name == "benyahia":
        _require_positive(params, ("a", "b", "e"))
        a, b, e = params["a"], params["b"], params["e"]
        return FoulingModel(
            name=name, params=dict(params),
            f1=lambda m: b / (e + m),
            f2=lambda m: a * m,
            g=lambda m: 1.0 / (e + m),
            df1=lambda m: -b / (e + m) ** 2,
            df2=lambda m: a + 0.0 * m,
            dg=lambda m: -1.0 / (e + m) ** 2,
        )
    if name == "cogan":
        _require_positive(params, ("a", "b", "e"))
        a, b, e = params["a"], params["b"], params["e"]
        return FoulingModel(
            name=name, params=dict(params),
            f1=lambda m: b / (e + m),
            f2=lambda m: a * m / (e + m),
            g=lambda m: 1.0 / (e + m),
            df1=lambda m: -b / (e + m) ** 2,
            df2=lambda m: a * e / (e + m) ** 2,
            dg=lambda m: -1.0 / (e + m) ** 2,
        )
    if name == "custom":
        if f1 is None or f2 is None or g is None:
            raise ModelError("custom model requires callables f1, f2 and g")
        df1 = df1 or (lambda m, _f=f1: _central_difference(_f, m))
        df2 = df2 or (lambda m, _f=f2: _central_difference(_f, m))
        dg = dg or (lambda m, _f=g: _central_difference(_f, m))
        return FoulingModel(name=name, params=dict(params),
                            f1=f1, f2=f2, g=g, df1=df1, df2=df2, dg=dg)
    raise ModelError(f"unknown model {name!r}; expected one of "
                     f"{BUILTIN_NAMES + ('custom',)}")


@dataclass
class HypothesisReport:
    """Grid-sampled verification of the model's standing assumptions.

    ``clauses`` maps each monotonicity/positivity clause to pass/fail.
    The sampled check cannot prove the assumptions for all m; it only
    certifies them on the grid (``note`` says so explicitly).
    """

    m_max: float
    n_samples: int
    clauses: dict = field(default_factory=dict)
    psi_sign_changes: int = 0
    psi_root_bracket: Optional[tuple] = None
    note: str = "verified on grid only"

    @property
    def hypothesis1_ok(self):
        return all(self.clauses.values())

    @property
    def hypothesis2_ok(self):
        return self.psi_sign_changes == 1 and self.psi_root_bracket is not None

    @property
    def all_ok(self):
        return self.hypothesis1_ok and self.hypothesis2_ok


def check_hypotheses(model: FoulingModel, m_max=50.0, n_samples=2000) -> HypothesisReport:
    """Sample [0, m_max] and report pass/fail for each standing assumption.

    Failures are reported, never raised.  The asymptotic clause g -> 0 is
    approximated by monotone decrease plus g(m_max) < 0.05*g(0).
    """
    if not (m_max > 0) or n_samples < 2:
        raise ModelError("m_max must be > 0 and n_samples >= 2")
    ms = np.linspace(0.0, m_max, n_samples)
    f1 = np.array([model.f1(m) for m in ms])
    f2 = np.array([model.f2(m) for m in ms])
    g = np.array([model.g(m) for m in ms])
    df1 = np.array([model.df1(m) for m in ms])
    df2 = np.array([model.df2(m) for m in ms])
    dg = np.array([model.dg(m) for m in ms])

    rep = HypothesisReport(m_max=m_max, n_samples=n_samples)
    rep.clauses["f1_positive"] = bool(np.all(f1 > 0))
    rep.clauses["g_positive"] = bool(np.all(g > 0))
    rep.clauses["f2_zero_at_origin"] = bool(abs(model.f2(0.0)) <= 1e-12)
    rep.clauses["f2_positive_for_m_positive"] = bool(np.all(f2[1:] > 0))
    rep.clauses["f1_decreasing"] = bool(np.all(df1 < 0))
    rep.clauses["g_decreasing"] = bool(np.all(dg < 0))
    rep.clauses["g_vanishes_at_infinity"] = bool(model.g(m_max) < 0.05 * model.g(0.0))
    rep.clauses["f2_increasing"] = bool(np.all(df2[1:] > 0))

    der = model.derived()
    psi = np.array([der.psi(m) for m in ms[1:]])  # m=0 excluded: root must be positive
    sign = np.sign(psi)
    flips = np.nonzero(np.diff(sign) != 0)[0]
    rep.psi_sign_changes = len(flips)
    if len(flips) == 1 and sign[flips[0]] < 0 < sign[flips[0] + 1]:
        i = flips[0]
        rep.psi_root_bracket = (float(ms[1:][i]), float(ms[1:][i + 1]))
    else:
        rep.psi_root_bracket = None
    return rep


def _psi_closed_form(model: FoulingModel, m):
    a, b, e = model.params["a"], model.params["b"], model.params["e"]
    if model.name == "benyahia":
        num = (a**2 * e**2 * m**2 + 2 * a**2 * e * m**3 + a**2 * m**4
               - 2 * a * b * e**2 - 6 * a * b * e * m - 4 * a * b * m**2 - b**2)
    elif model.name == "cogan":
        num = (a * m - b) ** 2 - 2 * a * b * e - 2 * b**2
    else:
        raise ModelError("closed-form psi is only available for built-in models")
    return num / (4.0 * (e + m) ** 4)


def psi_closed_form_check(model: FoulingModel, m) -> float:
    """|psi from DerivedFunctions - closed-form polynomial| for a built-in."""
    return abs(model.derived().psi(m) - _psi_closed_form(model, m))


def g_inverse(model: FoulingModel, y, tol=TOL_ROOT) -> float:
    """Invert the (strictly decreasing) flux: return m with g(m) = y.

    Valid for 0 < y <= g(0).  Built-ins use the closed form 1/y - e;
    custom models fall back to bisection on [0, M] with M doubled until
    g(M) < y.
    """
    g0 = model.g(0.0)
    if not (0.0 < y <= g0):
        raise ModelError(f"flux level {y} outside the range (0, g(0)={g0}]")
    if model.is_builtin:
        e = model.params["e"]
        return max(1.0 / y - e, 0.0)
    lo, hi = 0.0, 1.0
    while model.g(hi) >= y:
        hi *= 2.0
        if hi > 1e18:
            raise ModelError("g does not fall below the requested level")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if model.g(mid) >= y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
