"""Cross-check the feedback law against the dynamic-programming oracle.

A backward value recursion on a (t, m) grid gives an independent
estimate V(0, m0) of the best attainable production; the closed-loop
feedback cost must match it to within the grid's own refinement error.
A structured search over strategy families confirms the optimal shape.
"""

import numpy as np

from memsynth import build_model, compare_feedback_vs_dp, \
    dp_refinement_tolerance, find_singular_arc, sample_switching_curve, \
    strategy_enumeration

model = build_model("cogan", a=1.0, b=1.0, e=1.0)
horizon = 40.0
arc = find_singular_arc(model, horizon)
curve = sample_switching_curve(model, arc, horizon,
                               np.linspace(arc.m_bar, 16.0, 300))

points = [(0.0, m0) for m0 in (0.75, 1.5, 3.0, 5.0, 7.5)]
grid, tol_dp = dp_refinement_tolerance(model, horizon, arc, points,
                                       n_t=2001, n_m=1001)
report = compare_feedback_vs_dp(model, arc, curve, grid, points, tol_dp)

print(f"grid tolerance (refinement estimate): {tol_dp:.3e}\n")
print(f"{'m0':>6} {'J_feedback':>14} {'V_dp':>14} {'gap':>12}")
for r in report.rows:
    print(f"{r.m0:>6.2f} {r.J_feedback:>14.9f} {r.V_dp:>14.9f} {r.gap:>12.3e}")
print(f"\nall within tolerance: {report.passed}")

res = strategy_enumeration(model, arc, horizon, 10.0)
print(f"\nstrategy families from m0 = 10:")
for fam, cost in res.family_costs.items():
    marker = "  <- best" if fam == res.structure else ""
    print(f"  {fam:<16s} J = {cost:.9f}{marker}")
print(f"best structure switch times: {tuple(round(t, 6) for t in res.switch_times)}")
