"""Command-line front end: synthesis, simulation, oracle comparison and
dispersal checks, with CSV/SVG emission.

Subcommands: ``synth``, ``simulate``, ``compare``, ``dispersal``.
Exit codes: 0 success, 1 usage/config error, 2 contract violation.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import oracle, simulate, synthesis, svgplot
from .models import ModelError, build_model, check_hypotheses

DISPERSAL_TOL = 1e-6


class ConfigError(Exception):
    pass


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def load_config(path):
    """Config file: model in {benyahia, cogan}, positive a, b, e, and the
    horizon T in hours."""
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    for key in ("model", "a", "b", "e", "horizon"):
        if key not in raw:
            raise ConfigError(f"config missing key {key!r}")
    if raw["model"] not in ("benyahia", "cogan"):
        raise ConfigError(f"config model must be benyahia or cogan, "
                          f"got {raw['model']!r}")
    horizon = float(raw["horizon"])
    if not horizon > 0:
        raise ConfigError("horizon must be positive")
    model = build_model(raw["model"], a=float(raw["a"]), b=float(raw["b"]),
                        e=float(raw["e"]))
    return model, horizon


def default_curve_grid(model, arc, horizon, n=200):
    """Mass grid from m_bar out to just past where Ttilde drops below 0."""
    m_stop = arc.m_bar * 1.5
    m = arc.m_bar
    for _ in range(300):
        m *= 1.05
        T_tilde, _ = synthesis.switching_time(model, arc, horizon, m)
        if T_tilde > 0.0:
            m_stop = m * 1.1
        elif m > m_stop:
            break
    return np.linspace(arc.m_bar, m_stop, n)


def _write_csv(path, header, rows):
    lines = [header]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _synthesis_objects(model, horizon, n_curve=200):
    arc = synthesis.find_singular_arc(model, horizon)
    curve = None
    if arc.active:
        curve = synthesis.sample_switching_curve(
            model, arc, horizon, default_curve_grid(model, arc, horizon, n_curve))
    return arc, curve


def _branch_label(arc, curve):
    if not arc.active:
        return "inactive: f_minus(m_bar) >= 0, u=+1 everywhere"
    if arc.T_bar is not None and arc.T_bar <= 0:
        return "active arc never reached: T_bar <= 0"
    if curve is not None and not curve.nonempty:
        return "switching curve empty, u=+1 everywhere"
    return "active"


def _m_view(arc):
    if arc.active and arc.m_bar_T is not None:
        return 2.2 * arc.m_bar_T
    return 2.0 * arc.m_bar


def cmd_synth(args):
    model, horizon = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    arc, curve = _synthesis_objects(model, horizon, args.n_curve)
    summary = {
        "model": model.name,
        "params": model.params,
        "horizon": horizon,
        "m_bar": arc.m_bar,
        "u_bar": arc.u_bar,
        "lambda_bar": arc.lambda_bar,
        "f_minus_at_m_bar": arc.f_minus_at_m_bar,
        "m_bar_T": arc.m_bar_T,
        "T_bar": arc.T_bar,
        "branch": _branch_label(arc, curve),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    rows = []
    if curve is not None:
        rows = [(s.m_tilde, s.T_tilde, s.m_T, s.dT_tilde, s.kind)
                for s in curve.samples]
    if "csv" in args.formats:
        _write_csv(out / "curve.csv", "m,Ttilde,mT,dTtilde,kind", rows)
    if "svg" in args.formats:
        svg = svgplot.render_region_map(model, arc, curve, horizon,
                                        args.m_view or _m_view(arc))
        (out / "synthesis.svg").write_text(svg)
    print(f"synthesis written to {out} ({summary['branch']})")
    return 0


def _parse_control(spec, model, arc, curve, horizon):
    if spec == "feedback":
        return "feedback"
    if spec in ("constant:+1", "constant:1"):
        return 1.0
    if spec == "constant:-1":
        return -1.0
    if spec.startswith("schedule:"):
        path = spec.split(":", 1)[1]
        pairs = []
        for i, line in enumerate(Path(path).read_text().splitlines()):
            line = line.strip()
            if not line or line.startswith("t_start"):
                continue
            t_s, u_s = line.split(",")
            pairs.append((float(t_s), float(u_s)))
        if not pairs:
            raise ConfigError(f"empty schedule file {path}")
        return simulate.PiecewiseControl(pairs)
    raise ConfigError(f"unknown control mode {spec!r}")


def cmd_simulate(args):
    model, horizon = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    arc, curve = _synthesis_objects(model, horizon)
    control = _parse_control(args.control, model, arc, curve, horizon)
    if control == "feedback":
        traj = simulate.integrate_feedback(model, arc, curve, horizon,
                                           args.m0, t0=args.t0)
    else:
        traj = simulate.integrate_state(model, control, args.m0,
                                        (args.t0, horizon))
    simulate.integrate_adjoint(model, traj)
    if "csv" in args.formats:
        _write_csv(out / "trajectory.csv", "t,m,u,lambda,phi,H,J",
                   [(float(t), float(m), float(u), float(l), float(p),
                     float(h), float(j))
                    for t, m, u, l, p, h, j in zip(traj.t, traj.m, traj.u,
                                                   traj.lam, traj.phi, traj.H,
                                                   traj.J)])
        _write_csv(out / "events.csv", "t,kind,m",
                   [(ev.t, ev.kind, ev.m) for ev in traj.events])
    if "svg" in args.formats:
        svg = svgplot.render_region_map(model, arc, curve, horizon,
                                        _m_view(arc), trajectory=traj)
        (out / "trajectory.svg").write_text(svg)
    print(f"J_T = {traj.total_cost:.12g} ({len(traj.events)} events)")
    return 0


def _default_battery(arc):
    fractions = (0.25, 0.5, 0.75, 1.25, 1.75, 2.5)
    return [(0.0, f * arc.m_bar) for f in fractions]


def cmd_compare(args):
    model, horizon = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    arc, curve = _synthesis_objects(model, horizon)
    points = _default_battery(arc)
    grid, tol_dp = oracle.dp_refinement_tolerance(
        model, horizon, arc, points, n_t=args.nt, n_m=args.nm,
        m_min=args.m_min, m_max=args.m_max)
    report = oracle.compare_feedback_vs_dp(model, arc, curve, grid, points,
                                           tol_dp)
    _write_csv(out / "compare.csv", "t0,m0,J_feedback,V_dp,gap,tol_dp",
               [(r.t0, r.m0, r.J_feedback, r.V_dp, r.gap, tol_dp)
                for r in report.rows])
    summary = {"passed": report.passed, "tol_dp": tol_dp,
               "max_gap": max(abs(r.gap) for r in report.rows)}
    (out / "compare_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"compare: max gap {summary['max_gap']:.3g} vs tol_dp {tol_dp:.3g} "
          f"-> {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 2


def cmd_dispersal(args):
    model, horizon = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    arc, curve = _synthesis_objects(model, horizon, n_curve=400)
    disp = [] if curve is None else \
        [s for s in curve.samples if s.in_curve and s.kind == "dispersal"]
    if not disp:
        _write_csv(out / "dispersal.csv", "t,m,J_plus,J_minus,diff", [])
        print("dispersal: C_d empty")
        return 0
    step = max(len(disp) // args.n_points, 1)
    picked = disp[::step][:args.n_points]
    rows = oracle.dispersal_equality_check(
        model, arc, curve, horizon, [(s.T_tilde, s.m_tilde) for s in picked])
    _write_csv(out / "dispersal.csv", "t,m,J_plus,J_minus,diff",
               [(r.t, r.m, r.J_plus, r.J_minus, r.diff) for r in rows])
    worst = max(r.diff for r in rows)
    print(f"dispersal: {len(rows)} points, worst |J_plus - J_minus| = {worst:.3g}")
    return 0 if worst <= DISPERSAL_TOL else 2


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="model config file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--format", default="csv,svg", dest="format",
                        help="comma-separated subset of {csv,svg}")
    common.add_argument("--strict", action="store_true",
                        help="fail unless the model hypotheses verify on grid")

    p = argparse.ArgumentParser(prog="memsynth",
                                description="optimal filtration/backwash synthesis")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", parents=[common],
                        help="singular arc, switching curve and region map")
    ps.add_argument("--n-curve", type=int, default=200)
    ps.add_argument("--m-view", type=float, default=None)
    ps.set_defaults(func=cmd_synth)

    pm = sub.add_parser("simulate", parents=[common],
                        help="integrate a trajectory and its adjoint")
    pm.add_argument("--m0", type=float, required=True)
    pm.add_argument("--t0", type=float, default=0.0)
    pm.add_argument("--control", default="feedback",
                    help="feedback | constant:+1 | constant:-1 | schedule:<csv>")
    pm.set_defaults(func=cmd_simulate)

    pc = sub.add_parser("compare", parents=[common],
                        help="feedback cost vs dynamic-programming value")
    pc.add_argument("--nt", type=int, default=4001)
    pc.add_argument("--nm", type=int, default=2001)
    pc.add_argument("--m-min", type=float, default=1e-3)
    pc.add_argument("--m-max", type=float, default=60.0)
    pc.set_defaults(func=cmd_compare)

    pd = sub.add_parser("dispersal", parents=[common],
                        help="cost equality of the two strategies on C_d")
    pd.add_argument("--n-points", type=int, default=10)
    pd.set_defaults(func=cmd_dispersal)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.formats = {f.strip() for f in args.format.split(",") if f.strip()}
    if not args.formats or not args.formats <= {"csv", "svg"}:
        print(f"error: bad --format {args.format!r}", file=sys.stderr)
        return 1
    try:
        if args.strict:
            model, _ = load_config(args.config)
            rep = check_hypotheses(model)
            if not rep.all_ok:
                bad = [k for k, ok in rep.clauses.items() if not ok]
                if rep.psi_sign_changes != 1:
                    bad.append(f"psi sign changes = {rep.psi_sign_changes}")
                print(f"error: hypothesis check failed ({', '.join(bad)}); "
                      f"note: {rep.note}", file=sys.stderr)
                return 1
        return args.func(args)
    except (ConfigError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except synthesis.SynthesisError as exc:
        print(f"error: synthesis failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
