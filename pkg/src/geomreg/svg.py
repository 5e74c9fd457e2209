"""Bare-bones static SVG line plots (axes box, min/max labels, polylines)."""
from html import escape

import numpy as np

WIDTH, HEIGHT = 480, 320
MARGIN = 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v):
    return f"{v:.3g}"


def line_plot(path, series, title="", xlabel="", ylabel="", logx=False, logy=False, markers=False):
    """Write ``series`` (a list of ``(x, y, label)``) as one SVG file.

    On log axes, non-positive values are dropped from the polyline.
    """
    prepared = []
    for x, y, label in series:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        x, y = x[keep], y[keep]
        if logx:
            x = np.log10(x)
        if logy:
            y = np.log10(y)
        prepared.append((x, y, label))
    xs = np.concatenate([p[0] for p in prepared]) if prepared else np.zeros(1)
    ys = np.concatenate([p[1] for p in prepared]) if prepared else np.zeros(1)
    if xs.size == 0:
        xs = ys = np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v):
        return MARGIN + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * ph

    def tick(v, log):
        return ("1e" + _fmt(v)) if log else _fmt(v)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 14 {HEIGHT / 2})">'
        f"{escape(ylabel)}</text>",
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 14}" text-anchor="start">{tick(x0, logx)}</text>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 14}" text-anchor="end">{tick(x1, logx)}</text>',
        f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end">{tick(y0, logy)}</text>',
        f'<text x="{MARGIN - 4}" y="{MARGIN + 8}" text-anchor="end">{tick(y1, logy)}</text>',
    ]
    for k, (x, y, label) in enumerate(prepared):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        if markers:
            out.extend(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="2" fill="{color}"/>' for a, b in zip(x, y))
        if label:
            out.append(
                f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 14 + 13 * k}" text-anchor="end" '
                f'fill="{color}">{escape(label)}</text>'
            )
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return path
