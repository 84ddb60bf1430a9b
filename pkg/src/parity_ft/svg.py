"""Minimal SVG rendering of threshold curves (no plotting dependency)."""

from __future__ import annotations

import math
from collections.abc import Sequence

WIDTH, HEIGHT = 520, 400
MARGIN = (70, 20, 30, 60)  # left, right, top, bottom


def _nice_ticks(hi: float, count: int = 5) -> list[float]:
    if hi <= 0:
        return [0.0]
    raw = hi / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    n = int(math.floor(hi / step + 1e-9))
    return [k * step for k in range(n + 1)]


def _fmt(v: float) -> str:
    return "0" if v == 0 else f"{v:.2g}"


def render_curves(curves: Sequence[tuple[str, Sequence[tuple[float, float]]]], title: str = "") -> str:
    """Plot one or more (label, [(gamma, eta), ...]) curves; the first is shaded underneath."""
    pts_all = [p for _, pts in curves for p in pts]
    gmax = max((g for g, _ in pts_all), default=1.0) * 1.1 or 1.0
    emax = max((e for _, e in pts_all), default=1.0) * 1.1 or 1.0
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def sx(g):
        return left + pw * g / gmax

    def sy(e):
        return top + ph * (1 - e / emax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>')
    colors = ("#1f5fa8", "#b03a2e", "#2e8b57", "#7d3c98")
    for k, (label, pts) in enumerate(curves):
        pts = sorted(pts)
        if not pts:
            continue
        path = " ".join(f"{sx(g):.2f},{sy(e):.2f}" for g, e in pts)
        if k == 0:
            poly = f"{sx(0):.2f},{sy(0):.2f} {sx(0):.2f},{sy(pts[0][1]):.2f} {path} {sx(pts[-1][0]):.2f},{sy(0):.2f}"
            out.append(f'<polygon points="{poly}" fill="{colors[0]}" fill-opacity="0.15" stroke="none"/>')
        color = colors[k % len(colors)]
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        for g, e in pts:
            out.append(f'<circle cx="{sx(g):.2f}" cy="{sy(e):.2f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{left + pw - 4}" y="{top + 16 + 16 * k}" text-anchor="end" font-size="12" fill="{color}">{label}</text>')
    # axes
    out.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>')
    for t in _nice_ticks(gmax):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle" font-size="11">{_fmt(t)}</text>')
    for t in _nice_ticks(emax):
        y = sy(t)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">γ (loss)</text>')
    out.append(
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">η (depolarizing-related rate)</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
