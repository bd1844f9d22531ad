"""Minimal dependency-free SVG quick-looks: line plots and gray heatmaps."""
from __future__ import annotations

import math

import numpy as np

W, H = 720, 480
ML, MR, MT, MB = 70, 20, 40, 55  # margins
PALETTE = ("#1f4e9c", "#c03020", "#2a8a2a", "#8a5a2a", "#6a2a8a", "#2a8a8a")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _finite_span(arr) -> tuple[float, float]:
    vals = np.asarray(arr, dtype=float)
    vals = vals[np.isfinite(vals)]
    if len(vals) == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _axes(title: str, xlabel: str, ylabel: str, xlo, xhi, ylo, yhi) -> list[str]:
    out = [
        f'<rect x="{ML}" y="{MT}" width="{W-ML-MR}" height="{H-MT-MB}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
        f'<text x="{W/2:.0f}" y="24" text-anchor="middle" '
        f'font-size="16">{title}</text>',
        f'<text x="{(ML + W - MR)/2:.0f}" y="{H-14}" text-anchor="middle" '
        f'font-size="13">{xlabel}</text>',
        f'<text x="18" y="{(MT + H - MB)/2:.0f}" text-anchor="middle" '
        f'font-size="13" transform="rotate(-90 18 {(MT + H - MB)/2:.0f})">'
        f'{ylabel}</text>',
        f'<text x="{ML}" y="{H-MB+16}" text-anchor="middle" font-size="11">'
        f'{_fmt(xlo)}</text>',
        f'<text x="{W-MR}" y="{H-MB+16}" text-anchor="middle" font-size="11">'
        f'{_fmt(xhi)}</text>',
        f'<text x="{ML-6}" y="{H-MB}" text-anchor="end" font-size="11">'
        f'{_fmt(ylo)}</text>',
        f'<text x="{ML-6}" y="{MT+12}" text-anchor="end" font-size="11">'
        f'{_fmt(yhi)}</text>',
    ]
    return out


def line_plot(path: str, x, ys, labels, title: str, xlabel: str,
              ylabel: str) -> None:
    """Polyline plot of one or more series against a shared x axis."""
    x = np.asarray(x, dtype=float)
    series = [np.asarray(y, dtype=float) for y in ys]
    xlo, xhi = _finite_span(x)
    ylo, yhi = _finite_span(np.concatenate(series))
    sx = (W - ML - MR) / (xhi - xlo)
    sy = (H - MT - MB) / (yhi - ylo)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" '
             f'height="{H}" viewBox="0 0 {W} {H}">',
             f'<rect width="{W}" height="{H}" fill="white"/>']
    parts += _axes(title, xlabel, ylabel, xlo, xhi, ylo, yhi)
    for k, y in enumerate(series):
        pts = []
        for xi, yi in zip(x, y):
            if not (math.isfinite(xi) and math.isfinite(yi)):
                continue
            px = ML + (xi - xlo) * sx
            py = H - MB - (yi - ylo) * sy
            pts.append(f"{px:.2f},{py:.2f}")
        color = PALETTE[k % len(PALETTE)]
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{W-MR-8}" y="{MT+16+14*k}" text-anchor="end" '
                     f'font-size="12" fill="{color}">{labels[k]}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def heatmap(path: str, x, y, z, title: str, xlabel: str, ylabel: str,
            log_y: bool = False) -> None:
    """Grayscale cell map of z[y, x]; NaN cells are left white."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    ydisp = np.log10(y) if log_y else y
    xlo, xhi = _finite_span(x)
    ylo, yhi = _finite_span(ydisp)
    zlo, zhi = _finite_span(z)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" '
             f'height="{H}" viewBox="0 0 {W} {H}">',
             f'<rect width="{W}" height="{H}" fill="white"/>']
    ylab = f"log10({ylabel})" if log_y else ylabel
    parts += _axes(title + f"  [black={_fmt(zlo)}, white={_fmt(zhi)}]",
                   xlabel, ylab, xlo, xhi, ylo, yhi)
    cw = (W - ML - MR) / len(x)
    ch = (H - MT - MB) / len(y)
    for i in range(len(y)):
        for j in range(len(x)):
            v = z[i, j]
            if not math.isfinite(v):
                continue
            g = 255 if zhi == zlo else int(round(255 * (v - zlo) / (zhi - zlo)))
            g = min(255, max(0, g))
            px = ML + j * cw
            py = H - MB - (i + 1) * ch
            parts.append(f'<rect x="{px:.2f}" y="{py:.2f}" width="{cw:.2f}" '
                         f'height="{ch:.2f}" fill="rgb({g},{g},{g})"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(parts) + "\n")
