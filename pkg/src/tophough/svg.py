"""Minimal SVG figures: a point cloud with lines, and a persistence diagram."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .geometry import LineParams

SIZE = 400
PAD = 30
COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _n(x: float) -> str:
    return format(float(x), ".6g")


def _doc(body: list[str], title: str) -> str:
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
        *body,
        "</svg>",
        "",
    ])


def _clip(lp: LineParams, x0, x1, y0, y1):
    """Segment of the line inside the box, or None."""
    c, s = math.cos(lp.theta), math.sin(lp.theta)
    foot = np.array([lp.r * c, lp.r * s])
    d = np.array([-s, c])
    lo, hi = -math.inf, math.inf
    for k, (a, b) in enumerate(((x0, x1), (y0, y1))):
        if abs(d[k]) < 1e-15:
            if not a <= foot[k] <= b:
                return None
            continue
        t0, t1 = (a - foot[k]) / d[k], (b - foot[k]) / d[k]
        lo, hi = max(lo, min(t0, t1)), min(hi, max(t0, t1))
    if hi <= lo:
        return None
    return foot + lo * d, foot + hi * d


def scene_svg(points, lines=(), title: str = "points") -> str:
    """Scatter of ``points`` with ``lines`` drawn across the bounding box (y up)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    lo = pts.min(axis=0) if pts.size else np.zeros(2)
    hi = pts.max(axis=0) if pts.size else np.ones(2)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    margin = 0.05 * span
    lo, span = lo - margin, span + 2 * margin
    k = (SIZE - 2 * PAD) / span

    def tx(p):
        return PAD + (p[0] - lo[0]) * k, SIZE - PAD - (p[1] - lo[1]) * k

    body = [f'<rect x="{PAD}" y="{PAD}" width="{SIZE - 2 * PAD}" height="{SIZE - 2 * PAD}" '
            'fill="none" stroke="#999"/>']
    for idx, lp in enumerate(lines):
        seg = _clip(lp, lo[0], lo[0] + span, lo[1], lo[1] + span)
        if seg is None:
            continue
        (ax, ay), (bx, by) = tx(seg[0]), tx(seg[1])
        body.append(f'<line x1="{_n(ax)}" y1="{_n(ay)}" x2="{_n(bx)}" y2="{_n(by)}" '
                    f'stroke="{COLORS[idx % len(COLORS)]}" stroke-width="1.5"/>')
    for p in pts:
        x, y = tx(p)
        body.append(f'<circle cx="{_n(x)}" cy="{_n(y)}" r="2.5" fill="black"/>')
    return _doc(body, title)


def diagram_svg(births, deaths, title: str = "persistence diagram") -> str:
    """Birth (x) against death (y) with the diagonal; points sit below it."""
    b = np.asarray(births, dtype=np.float64)
    d = np.asarray(deaths, dtype=np.float64)
    top = float(max(b.max() if b.size else 0.0, d.max() if d.size else 0.0, 1e-12)) * 1.05
    k = (SIZE - 2 * PAD) / top

    def tx(x, y):
        return PAD + x * k, SIZE - PAD - y * k

    x0, y0 = tx(0.0, 0.0)
    x1, y1 = tx(top, top)
    body = [
        f'<line x1="{_n(x0)}" y1="{_n(y0)}" x2="{_n(x1)}" y2="{_n(y0)}" stroke="black"/>',
        f'<line x1="{_n(x0)}" y1="{_n(y0)}" x2="{_n(x0)}" y2="{_n(y1)}" stroke="black"/>',
        f'<line x1="{_n(x0)}" y1="{_n(y0)}" x2="{_n(x1)}" y2="{_n(y1)}" stroke="#999" stroke-dasharray="4 3"/>',
        f'<text x="{_n(x1)}" y="{_n(y0 + 18)}" font-size="11" text-anchor="end">birth</text>',
        f'<text x="{_n(x0 - 6)}" y="{_n(y1)}" font-size="11" text-anchor="end">death</text>',
    ]
    for bi, di in zip(b, d):
        x, y = tx(bi, di)
        body.append(f'<circle cx="{_n(x)}" cy="{_n(y)}" r="3" fill="#1f77b4"/>')
    return _doc(body, title)
