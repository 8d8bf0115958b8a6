"""Minimal static SVG charts: polyline series with axes and a legend.

Self-contained string emission, no renderer dependency; output is
deterministic for identical inputs.
"""

from __future__ import annotations

import math

__all__ = ["render_line_chart"]

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 48

PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
]


def _axis_range(lo: float, hi: float) -> tuple[float, float]:
    """Pad the data range by 5%; degenerate ranges get a unit pad."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("non-finite axis range")
    if lo == hi:
        return lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    raw = (hi - lo) / (count - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mag * mult >= raw:
            step = mag * mult
            break
    first = math.ceil(lo / step) * step
    ticks, t, i = [], first, 0
    while t <= hi + 1e-12 * abs(step):
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        i += 1
        t = first + i * step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_line_chart(series, out_path=None, xlabel: str = "x",
                      ylabel: str = "y", title: str = "") -> str:
    """Render labeled polylines to an SVG document.

    series: iterable of (label, xs, ys) with equal-length nonempty sequences.
    Returns the SVG text; writes it to out_path when given.
    """
    series = [(str(lbl), list(xs), list(ys)) for lbl, xs, ys in series]
    if not series:
        raise ValueError("no series to plot")
    for lbl, xs, ys in series:
        if not xs or len(xs) != len(ys):
            raise ValueError(f"series {lbl!r} is empty or ragged")
    x_lo, x_hi = _axis_range(min(min(xs) for _, xs, _ in series),
                             max(max(xs) for _, xs, _ in series))
    y_lo, y_hi = _axis_range(min(min(ys) for _, _, ys in series),
                             max(max(ys) for _, _, ys in series))

    px_w = WIDTH - MARGIN_L - MARGIN_R
    px_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * px_w

    def sy(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * px_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">'
    )
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    if title:
        out.append(
            f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" '
            f'font-size="14">{title}</text>'
        )
    # axes
    x0, y0 = MARGIN_L, HEIGHT - MARGIN_B
    out.append(
        f'<path d="M {x0} {MARGIN_T} L {x0} {y0} L {WIDTH - MARGIN_R} {y0}" '
        'stroke="black" fill="none"/>'
    )
    for t in _ticks(x_lo, x_hi):
        px = sx(t)
        out.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(
            f'<text x="{px:.1f}" y="{y0 + 18}" text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        py = sy(t)
        out.append(f'<line x1="{x0 - 5}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
        out.append(
            f'<text x="{x0 - 8}" y="{py + 4:.1f}" text-anchor="end">{_fmt(t)}</text>'
        )
    out.append(
        f'<text x="{MARGIN_L + px_w / 2:.1f}" y="{HEIGHT - 10}" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{MARGIN_T + px_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + px_h / 2:.1f})">{ylabel}</text>'
    )
    # series
    for i, (lbl, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    # legend
    lx, ly = MARGIN_L + 10, MARGIN_T + 8
    for i, (lbl, _, _) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        yy = ly + 16 * i
        out.append(
            f'<line x1="{lx}" y1="{yy}" x2="{lx + 22}" y2="{yy}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{lx + 28}" y="{yy + 4}">{lbl}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if out_path is not None:
        with open(out_path, "w") as f:
            f.write(text)
    return text
