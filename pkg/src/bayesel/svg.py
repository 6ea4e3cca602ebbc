"""Minimal SVG rendering for grid heat maps and trace lines.

Plots are convenience output only; nothing reads them back.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["grid_svg", "trace_svg"]

_W, _H, _PAD = 480, 400, 50
# light to dark, low to high log posterior
_PALETTE = ["#f7fbff", "#deebf7", "#c6dbef", "#9ecae1", "#6baed6",
            "#4292c6", "#2171b5", "#08519c", "#08306b"]


def _header(width: int, height: int) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            f'<rect width="{width}" height="{height}" fill="white"/>']


def grid_svg(x, y, values, path, xlabel: str = "theta1", ylabel: str = "theta2") -> Path:
    """Banded heat map of ``values[i, j]`` at ``(x[i], y[j])``; non-finite cells stay blank.

    Bands are the top 9 log-units below the maximum, one unit each, which
    shows the shape of the support and the high-density region.
    """
    x, y, v = np.asarray(x, float), np.asarray(y, float), np.asarray(values, float)
    out = _header(_W, _H)
    pw, ph = _W - 2 * _PAD, _H - 2 * _PAD
    cw, ch = pw / x.size, ph / y.size
    finite = np.isfinite(v)
    top = v[finite].max() if finite.any() else 0.0
    for i in range(x.size):
        for j in range(y.size):
            if not finite[i, j]:
                continue
            band = int(np.clip(8 - np.floor(top - v[i, j]), 0, 8))
            out.append(f'<rect x="{_PAD + i * cw:.2f}" y="{_H - _PAD - (j + 1) * ch:.2f}" '
                       f'width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" '
                       f'fill="{_PALETTE[band]}"/>')
    out += _axes(x[0], x[-1], y[0], y[-1], xlabel, ylabel)
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path


def trace_svg(series: dict, path, burn_in: int = 0) -> Path:
    """One panel per named series, stacked vertically, burn-in shaded."""
    names = list(series)
    panel = 120
    height = panel * max(len(names), 1) + _PAD
    out = _header(_W, height)
    for k, name in enumerate(names):
        s = np.asarray(series[name], float)
        top = 20 + k * panel
        h = panel - 35
        lo, hi = (np.nanmin(s), np.nanmax(s)) if s.size else (0.0, 1.0)
        if hi == lo:
            hi = lo + 1.0
        n = max(s.size, 2)
        step = max(1, s.size // 1000)
        xs = _PAD + np.arange(0, s.size, step) / (n - 1) * (_W - 2 * _PAD)
        ys = top + h - (s[::step] - lo) / (hi - lo) * h
        if burn_in:
            bw = min(burn_in / (n - 1), 1.0) * (_W - 2 * _PAD)
            out.append(f'<rect x="{_PAD}" y="{top}" width="{bw:.2f}" height="{h}" fill="#eeeeee"/>')
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(xs, ys) if np.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#2171b5" stroke-width="0.7"/>')
        out.append(f'<text x="{_PAD}" y="{top - 4}">{name}</text>')
        out.append(f'<text x="{_PAD - 4}" y="{top + 4}" text-anchor="end">{hi:.3g}</text>')
        out.append(f'<text x="{_PAD - 4}" y="{top + h}" text-anchor="end">{lo:.3g}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path


def _axes(x0, x1, y0, y1, xlabel, ylabel) -> list[str]:
    b = _H - _PAD
    return [
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" '
        f'fill="none" stroke="black"/>',
        f'<text x="{_PAD}" y="{b + 15}">{x0:.3g}</text>',
        f'<text x="{_W - _PAD}" y="{b + 15}" text-anchor="end">{x1:.3g}</text>',
        f'<text x="{_W / 2}" y="{b + 32}" text-anchor="middle">{xlabel}</text>',
        f'<text x="{_PAD - 4}" y="{b}" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{_PAD - 4}" y="{_PAD + 8}" text-anchor="end">{y1:.3g}</text>',
        f'<text x="14" y="{_H / 2}" transform="rotate(-90 14 {_H / 2})" '
        f'text-anchor="middle">{ylabel}</text>',
    ]
