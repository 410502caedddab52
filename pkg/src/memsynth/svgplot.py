"""Hand-emitted SVG region maps of the optimal synthesis.

No plotting framework: the figures are axis-aligned rects, polygons and
polylines only.  Coordinates: time on the horizontal axis over [0, T],
mass on the vertical axis over [0, m_view].
"""

__all__ = ["render_region_map"]

_W, _H = 720, 520
_ML, _MR, _MT, _MB = 60, 20, 20, 45  # margins

_COL_W = "#9ecbf5"          # backwash region
_COL_SWITCH = "#e8b800"      # switching locus (yellow)
_COL_DISPERSAL = "#8c8c8c"   # dispersal locus (gray)
_COL_SING = "#d62728"        # singular segment
_COL_TRAJ = "#1a1a1a"


def _fmt(x):
    return f"{x:.6g}"


class _Canvas:
    def __init__(self, horizon, m_view):
        self.horizon = horizon
        self.m_view = m_view
        self.parts = []

    def xy(self, t, m):
        x = _ML + (t / self.horizon) * (_W - _ML - _MR)
        y = _H - _MB - (m / self.m_view) * (_H - _MT - _MB)
        return x, y

    def polygon(self, pts, fill, opacity=1.0):
        d = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.xy(t, m) for t, m in pts))
        self.parts.append(f'<polygon points="{d}" fill="{fill}" '
                          f'fill-opacity="{opacity}" stroke="none"/>')

    def polyline(self, pts, stroke, width=2.5):
        d = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.xy(t, m) for t, m in pts))
        self.parts.append(f'<polyline points="{d}" fill="none" '
                          f'stroke="{stroke}" stroke-width="{width}"/>')

    def text(self, t, m, s, size=13, anchor="start", color="#000"):
        x, y = self.xy(t, m)
        self.parts.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
                          f'text-anchor="{anchor}" fill="{color}" '
                          f'font-family="sans-serif">{s}</text>')

    def axes(self):
        x0, y0 = self.xy(0, 0)
        x1, y1 = self.xy(self.horizon, self.m_view)
        self.parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" '
                          f'width="{_fmt(x1 - x0)}" height="{_fmt(y0 - y1)}" '
                          f'fill="none" stroke="#000" stroke-width="1"/>')
        for k in range(5):
            t = self.horizon * k / 4
            m = self.m_view * k / 4
            xt, _ = self.xy(t, 0)
            _, ym = self.xy(0, m)
            self.parts.append(f'<line x1="{_fmt(xt)}" y1="{_fmt(y0)}" '
                              f'x2="{_fmt(xt)}" y2="{_fmt(y0 + 5)}" stroke="#000"/>')
            self.parts.append(f'<text x="{_fmt(xt)}" y="{_fmt(y0 + 20)}" font-size="12" '
                              f'text-anchor="middle" font-family="sans-serif">{t:.3g}</text>')
            self.parts.append(f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(ym)}" '
                              f'x2="{_fmt(x0)}" y2="{_fmt(ym)}" stroke="#000"/>')
            self.parts.append(f'<text x="{_fmt(x0 - 9)}" y="{_fmt(ym + 4)}" font-size="12" '
                              f'text-anchor="end" font-family="sans-serif">{m:.3g}</text>')
        self.parts.append(f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(_H - 8)}" '
                          f'font-size="13" text-anchor="middle" '
                          f'font-family="sans-serif">t [h]</text>')
        self.parts.append(f'<text x="14" y="{_fmt((y0 + y1) / 2)}" font-size="13" '
                          f'text-anchor="middle" font-family="sans-serif" '
                          f'transform="rotate(-90 14 {_fmt((y0 + y1) / 2)})">m</text>')

    def render(self):
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
                f'height="{_H}" viewBox="0 0 {_W} {_H}">\n'
                f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>\n'
                f"{body}\n</svg>\n")


def render_region_map(model, arc, curve, horizon, m_view, trajectory=None):
    """Region map: backwash region, singular segment and the switching
    curve colored by kind; optional trajectory overlay.  Returns SVG text."""
    cv = _Canvas(horizon, m_view)

    in_curve = [] if curve is None else \
        [s for s in curve.samples if s.in_curve and s.m_tilde <= m_view]
    if in_curve:
        poly = [(0.0, in_curve[0].m_tilde)]
        poly += [(min(s.T_tilde, horizon), s.m_tilde) for s in in_curve]
        poly += [(0.0, in_curve[-1].m_tilde)]
        cv.polygon(poly, _COL_W, opacity=0.55)
        for a, b in zip(in_curve[:-1], in_curve[1:]):
            color = _COL_DISPERSAL if b.kind == "dispersal" else _COL_SWITCH
            cv.polyline([(a.T_tilde, a.m_tilde), (b.T_tilde, b.m_tilde)],
                        color, width=3.0)
    if arc.active and arc.T_bar is not None and arc.T_bar > 0:
        cv.polyline([(0.0, arc.m_bar), (min(arc.T_bar, horizon), arc.m_bar)],
                    _COL_SING, width=3.0)
    if not in_curve:
        cv.text(horizon * 0.05, m_view * 0.92, "u = +1 everywhere")
    if trajectory is not None:
        pts = [(t, m) for t, m in zip(trajectory.t, trajectory.m) if m <= m_view]
        if pts:
            cv.polyline(pts, _COL_TRAJ, width=1.8)
    cv.axes()
    return cv.render()
