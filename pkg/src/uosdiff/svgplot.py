"""Minimal static SVG writer for log-log curves with error bars."""

from __future__ import annotations

import math

_WIDTH, _HEIGHT = 640, 480
_MARGIN = 70


def _ticks(lo: float, hi: float):
    first = math.ceil(math.log10(lo) - 1e-9)
    last = math.floor(math.log10(hi) + 1e-9)
    return [10.0 ** e for e in range(first, last + 1)]


def loglog_plot(path, x, y, yerr=None, xlabel: str = "x", ylabel: str = "y",
                title: str = ""):
    """Write a log-log line plot with optional error bars as a standalone SVG."""
    pairs = [(float(a), float(b)) for a, b in zip(x, y) if a > 0 and b > 0]
    if not pairs:
        raise ValueError("need at least one positive (x, y) point")
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    x_lo, x_hi = min(xs) / 1.3, max(xs) * 1.3
    y_lo, y_hi = min(ys) / 1.6, max(ys) * 1.6

    def px(v):
        frac = (math.log10(v) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        return _MARGIN + frac * (_WIDTH - 2 * _MARGIN)

    def py(v):
        frac = (math.log10(v) - math.log10(y_lo)) / (math.log10(y_hi) - math.log10(y_lo))
        return _HEIGHT - _MARGIN - frac * (_HEIGHT - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="black"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        tx = px(tick)
        parts.append(f'<line x1="{tx:.1f}" y1="{_HEIGHT - _MARGIN}" '
                     f'x2="{tx:.1f}" y2="{_HEIGHT - _MARGIN + 6}" stroke="black"/>')
        parts.append(f'<text x="{tx:.1f}" y="{_HEIGHT - _MARGIN + 20}" '
                     f'font-size="11" text-anchor="middle">1e{int(math.log10(tick))}</text>')
    for tick in _ticks(y_lo, y_hi):
        ty = py(tick)
        parts.append(f'<line x1="{_MARGIN - 6}" y1="{ty:.1f}" '
                     f'x2="{_MARGIN}" y2="{ty:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN - 10}" y="{ty + 4:.1f}" font-size="11" '
                     f'text-anchor="end">1e{int(math.log10(tick))}</text>')
    if yerr is not None:
        for (xv, yv), err in zip(pairs, yerr):
            lo = max(yv - err, y_lo)
            hi = min(yv + err, y_hi)
            parts.append(f'<line x1="{px(xv):.1f}" y1="{py(lo):.1f}" '
                         f'x2="{px(xv):.1f}" y2="{py(hi):.1f}" stroke="steelblue"/>')
    points = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in pairs)
    parts.append(f'<polyline points="{points}" fill="none" stroke="steelblue" '
                 'stroke-width="1.5"/>')
    for a, b in pairs:
        parts.append(f'<circle cx="{px(a):.1f}" cy="{py(b):.1f}" r="3" '
                     'fill="steelblue"/>')
    parts.append(f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 20}" font-size="13" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="18" y="{_HEIGHT / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_HEIGHT / 2})">{ylabel}</text>')
    if title:
        parts.append(f'<text x="{_WIDTH / 2}" y="30" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
