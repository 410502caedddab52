"""Audit the non-transversal part of the switching curve.

From each sampled point of the non-transversal (dispersal-labelled) part
of the curve, two candidate strategies exist: filter to the end, or
backwash back into the region until the transversal part of the curve is
reached and then filter.  This script simulates both and prints the cost
gap at each point, together with the value of a dynamic-programming
oracle that adjudicates which strategy is actually optimal.

For the configuration below the two costs do NOT tie: the backwash
strategy strictly dominates, and the oracle value converges to it under
grid refinement.  The cost gap vanishes only at the tangency point where
the transversal and non-transversal parts meet.
"""

import numpy as np

from memsynth import build_model, dispersal_equality_check, \
    find_singular_arc, sample_switching_curve, solve_dp, value_at

model = build_model("cogan", a=1.0, b=1.0, e=1.0)
horizon = 40.0
arc = find_singular_arc(model, horizon)
curve = sample_switching_curve(model, arc, horizon,
                               np.linspace(arc.m_bar, 16.0, 600))

disp = [s for s in curve.samples if s.in_curve and s.kind == "dispersal"]
picked = disp[:: max(len(disp) // 8, 1)][:8]
rows = dispersal_equality_check(model, arc, curve, horizon,
                                [(s.T_tilde, s.m_tilde) for s in picked])

grid = solve_dp(model, horizon, arc, n_t=4001, n_m=2001)

print(f"{'m':>8} {'t':>9} {'J_filter':>11} {'J_backwash':>11} "
      f"{'gap':>10} {'V_oracle':>10}")
for r in rows:
    V = value_at(grid, r.t, r.m)
    print(f"{r.m:>8.4f} {r.t:>9.4f} {r.J_plus:>11.6f} {r.J_minus:>11.6f} "
          f"{r.J_minus - r.J_plus:>10.6f} {V:>10.6f}")

print("\nthe oracle tracks the backwash cost, so the curve's "
      "non-transversal part is not an equal-cost locus here; the true "
      "equal-cost boundary lies at later times.")
