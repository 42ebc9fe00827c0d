"""Minimal self-contained SVG output: heatmaps and line plots.

The heatmap colormap is a fixed 256-entry table, ``COLORMAP[i]`` for
``i = 0..255``, obtained by piecewise-linear interpolation between the nine
anchor colours in ``_ANCHORS`` (dark violet through teal to yellow) and
rounding each channel to the nearest integer.  Values are mapped to
entries with ``floor(255 * (v - lo) / (hi - lo) + 0.5)``.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_ANCHORS = np.array([
    (68, 1, 84), (71, 44, 122), (59, 81, 139), (44, 113, 142), (33, 144, 141),
    (39, 173, 129), (92, 200, 99), (170, 220, 50), (253, 231, 37),
], dtype=float)


def _build_colormap():
    pos = np.linspace(0.0, 1.0, _ANCHORS.shape[0])
    t = np.arange(256) / 255.0
    rgb = np.column_stack([np.interp(t, pos, _ANCHORS[:, c]) for c in range(3)])
    return ["#%02x%02x%02x" % tuple(int(v) for v in np.floor(row + 0.5)) for row in rgb]


COLORMAP = _build_colormap()
SERIES_COLORS = ["#1f4e9c", "#c0392b", "#1e8449", "#8e44ad", "#d68910", "#566573"]

W, H = 640, 480
ML, MR, MT, MB = 70, 90, 40, 55


def color_index(v, lo, hi):
    if hi <= lo:
        return np.zeros(np.shape(v), dtype=int)
    idx = np.floor(255.0 * (np.asarray(v, float) - lo) / (hi - lo) + 0.5)
    return np.clip(idx, 0, 255).astype(int)


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def _head(title):
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
            f'<rect width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
            f'{escape(title)}</text>']


def _axes(out, xlo, xhi, ylo, yhi, xlabel, ylabel):
    pw, ph = W - ML - MR, H - MT - MB
    out.append(f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for v in _ticks(xlo, xhi):
        px = ML + (v - xlo) / ((xhi - xlo) or 1.0) * pw
        out.append(f'<line x1="{px:.2f}" y1="{MT + ph}" x2="{px:.2f}" y2="{MT + ph + 5}" '
                   'stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{MT + ph + 18}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(ylo, yhi):
        py = MT + ph - (v - ylo) / ((yhi - ylo) or 1.0) * ph
        out.append(f'<line x1="{ML - 5}" y1="{py:.2f}" x2="{ML}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{py + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{ML + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MT + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MT + ph / 2:.1f})">{escape(ylabel)}</text>')


def heatmap(path, xs, ts, Z, title="", xlabel="x", ylabel="t", max_cells=200):
    """Cells ``Z[i, j]`` at time ``ts[i]`` and location ``xs[j]``; rows and
    columns are strided down to at most ``max_cells`` each."""
    xs, ts, Z = np.asarray(xs, float), np.asarray(ts, float), np.asarray(Z, float)
    si = max(1, int(np.ceil(len(ts) / max_cells)))
    sj = max(1, int(np.ceil(len(xs) / max_cells)))
    ts_s, xs_s, Zs = ts[::si], xs[::sj], Z[::si, ::sj]
    lo, hi = float(np.nanmin(Zs)), float(np.nanmax(Zs))
    idx = color_index(Zs, lo, hi)
    pw, ph = W - ML - MR, H - MT - MB
    cw, chh = pw / len(xs_s), ph / len(ts_s)
    out = _head(title)
    for i in range(len(ts_s)):
        y = MT + ph - (i + 1) * chh
        for j in range(len(xs_s)):
            out.append(f'<rect x="{ML + j * cw:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                       f'height="{chh + 0.05:.2f}" fill="{COLORMAP[idx[i, j]]}"/>')
    _axes(out, xs_s[0], xs_s[-1], ts_s[0], ts_s[-1], xlabel, ylabel)
    bx = W - MR + 20
    for k in range(0, 256, 4):
        y = MT + ph - (k + 4) / 256 * ph
        out.append(f'<rect x="{bx}" y="{y:.2f}" width="15" height="{ph / 64 + 0.05:.2f}" '
                   f'fill="{COLORMAP[k]}"/>')
    out.append(f'<text x="{bx + 18}" y="{MT + ph}">{lo:.3g}</text>')
    out.append(f'<text x="{bx + 18}" y="{MT + 10}">{hi:.3g}</text>')
    out.append("</svg>")
    _write(path, out)


def line_plot(path, series, title="", xlabel="", ylabel="", diagonal=False, markers=False):
    """``series`` is a list of ``(name, x, y)``; ``diagonal`` draws ``y = x``."""
    allx = np.concatenate([np.asarray(s[1], float) for s in series])
    ally = np.concatenate([np.asarray(s[2], float) for s in series])
    xlo, xhi = float(np.nanmin(allx)), float(np.nanmax(allx))
    ylo, yhi = float(np.nanmin(ally)), float(np.nanmax(ally))
    if diagonal:
        xlo = ylo = min(xlo, ylo)
        xhi = yhi = max(xhi, yhi)
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    pw, ph = W - ML - MR, H - MT - MB

    def px(x):
        return ML + (np.asarray(x, float) - xlo) / (xhi - xlo) * pw

    def py(y):
        return MT + ph - (np.asarray(y, float) - ylo) / (yhi - ylo) * ph

    out = _head(title)
    _axes(out, xlo, xhi, ylo, yhi, xlabel, ylabel)
    if diagonal:
        out.append(f'<line x1="{px(xlo):.2f}" y1="{py(ylo):.2f}" x2="{px(xhi):.2f}" '
                   f'y2="{py(yhi):.2f}" stroke="#999" stroke-dasharray="4 3"/>')
    for n, (name, x, y) in enumerate(series):
        color = SERIES_COLORS[n % len(SERIES_COLORS)]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)) if np.isfinite(b))
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{pts}"/>')
        if markers:
            for a, b in zip(px(x), py(y)):
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2" fill="{color}"/>')
        ly = MT + 16 + 16 * n
        out.append(f'<line x1="{W - MR + 8}" y1="{ly}" x2="{W - MR + 24}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - MR + 28}" y="{ly + 4}">{escape(str(name))}</text>')
    out.append("</svg>")
    _write(path, out)


def _write(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        fh.write("\n".join(lines) + "\n")
