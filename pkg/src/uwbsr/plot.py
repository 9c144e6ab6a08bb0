"""Minimal SVG rendering of BER curves (log-y, 95% whiskers)."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def ber_svg(series: Mapping[str, Sequence], title: str = "", width: int = 640, height: int = 440) -> str:
    """Render ``{label: [BerPoint, ...]}`` as an SVG document."""
    left, right, top, bottom = 70, 130, 30, 50
    pts = [p for ps in series.values() for p in ps]
    xs = [p.snr_db for p in pts]
    positive = [v for p in pts for v in (p.ber, p.ci_low, p.ci_high) if v > 0]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    y_lo = math.floor(math.log10(min(positive))) if positive else -6
    y_lo = min(y_lo, -1)

    def px(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def py(v):
        lv = math.log10(max(v, 10 ** y_lo))
        return top + (0 - lv) / (0 - y_lo) * (height - top - bottom)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>']
    for e in range(y_lo, 1):
        y = py(10 ** e)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{width - right}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    for x in sorted(set(xs)):
        out.append(f'<text x="{px(x):.1f}" y="{height - bottom + 16}" text-anchor="middle">{x:g}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{width - left - right}" '
               f'height="{height - top - bottom}" fill="none" stroke="black"/>')
    out.append(f'<text x="{(left + width - right) / 2:.1f}" y="{height - 12}" '
               f'text-anchor="middle">Eb/N0 (dB)</text>')
    out.append(f'<text x="16" y="{(top + height - bottom) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(top + height - bottom) / 2:.1f})">BER</text>')
    for n, (label, ps) in enumerate(series.items()):
        color = COLORS[n % len(COLORS)]
        ps = sorted(ps, key=lambda p: p.snr_db)
        line = " ".join(f"{px(p.snr_db):.1f},{py(p.ber):.1f}" for p in ps)
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for p in ps:
            x = px(p.snr_db)
            out.append(f'<line x1="{x:.1f}" y1="{py(p.ci_low):.1f}" x2="{x:.1f}" '
                       f'y2="{py(p.ci_high):.1f}" stroke="{color}"/>')
            marker = "none" if p.censored else color
            out.append(f'<circle cx="{x:.1f}" cy="{py(p.ber):.1f}" r="2.5" fill="{marker}" stroke="{color}"/>')
        ly = top + 14 + 16 * n
        out.append(f'<line x1="{width - right + 10}" y1="{ly - 4}" x2="{width - right + 30}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{width - right + 35}" y="{ly}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
