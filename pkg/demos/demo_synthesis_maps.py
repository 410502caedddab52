"""Compute the full synthesis for both built-in fouling models and write
region-map SVGs.

The map shows the backwash region (blue), the singular segment (red) and
the switching curve colored by kind: yellow where trajectories genuinely
switch, gray where the curve is non-transversal.
"""

from pathlib import Path

import numpy as np

from memsynth import build_model, check_hypotheses, find_singular_arc, \
    sample_switching_curve
from memsynth.svgplot import render_region_map

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

for name, horizon in (("benyahia", 10.0), ("cogan", 40.0)):
    model = build_model(name, a=1.0, b=1.0, e=1.0)
    rep = check_hypotheses(model)
    arc = find_singular_arc(model, horizon)
    curve = sample_switching_curve(
        model, arc, horizon, np.linspace(arc.m_bar, 6 * arc.m_bar, 400))

    print(f"--- {name} (T = {horizon:g}) ---")
    print(f"hypotheses on grid: {'ok' if rep.all_ok else 'FAILED'}")
    print(f"singular mass       m_bar    = {arc.m_bar:.10f}")
    print(f"singular control    u_bar    = {arc.u_bar:.10f}")
    print(f"singular adjoint    lam_bar  = {arc.lambda_bar:.10f}")
    print(f"terminal exit mass  m_bar_T  = {arc.m_bar_T:.10f}")
    print(f"last arc time       T_bar    = {arc.T_bar:.10f}")
    print(f"curve kinds present: {', '.join(curve.kinds_present())}")

    svg = render_region_map(model, arc, curve, horizon, 2.2 * arc.m_bar_T)
    path = OUT / f"{name}_map.svg"
    path.write_text(svg)
    print(f"wrote {path}\n")
