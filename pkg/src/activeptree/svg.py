"""Minimal SVG line charts for aggregate posterior curves."""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
MARGIN = dict(left=70, right=150, top=40, bottom=60)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def nice_ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step * 1e-9, step)


def line_chart(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "interventions",
    ylabel: str = "posterior of true hypothesis",
) -> str:
    """Render ``{name: (mean, stderr)}`` as polylines with dashed +-SE bands."""
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    n = max(len(m) for m, _ in series.values())
    xmax = max(n - 1, 1)
    ylo, yhi = 0.0, 1.0

    def px(i):
        return x0 + (x1 - x0) * i / xmax

    def py(v):
        return y0 - (y0 - y1) * (v - ylo) / (yhi - ylo)

    def poly(vals, color, extra=""):
        pts = " ".join(f"{px(i):.2f},{py(v):.2f}" for i, v in enumerate(vals))
        return f'<polyline fill="none" stroke="{color}" points="{pts}"{extra}/>'

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for t in nice_ticks(0, xmax):
        out.append(f'<line x1="{px(t):.2f}" y1="{y0}" x2="{px(t):.2f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{y0 + 20}" text-anchor="middle" font-size="12">{t:g}</text>')
    for t in nice_ticks(ylo, yhi):
        out.append(f'<line x1="{x0 - 5}" y1="{py(t):.2f}" x2="{x0}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{py(t) + 4:.2f}" text-anchor="end" font-size="12">{t:g}</text>')
    for i, (name, (mean, se)) in enumerate(series.items()):
        c = COLORS[i % len(COLORS)]
        mean, se = np.asarray(mean, dtype=float), np.asarray(se, dtype=float)
        out.append(poly(np.clip(mean + se, ylo, yhi), c, ' stroke-dasharray="4 3" stroke-width="0.8"'))
        out.append(poly(np.clip(mean - se, ylo, yhi), c, ' stroke-dasharray="4 3" stroke-width="0.8"'))
        out.append(poly(mean, c, ' stroke-width="2"'))
        ly = y1 + 20 * i + 10
        out.append(f'<line x1="{x1 + 15}" y1="{ly}" x2="{x1 + 40}" y2="{ly}" stroke="{c}" stroke-width="2"/>')
        out.append(f'<text x="{x1 + 45}" y="{ly + 4}" font-size="12">{escape(name)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="14">{escape(xlabel)}</text>')
    out.append(
        f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2})">{escape(ylabel)}</text>'
    )
    if title:
        out.append(f'<text x="{(x0 + x1) / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
