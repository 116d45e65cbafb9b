"""Minimal self-contained SVG charts (polylines, markers, interval bars).

No plotting dependency: output files are plain SVG with fixed geometry,
enough for shrinkage curves and per-component weight profiles.
"""

from __future__ import annotations

import math

import numpy as np

WIDTH, HEIGHT = 720, 480
MARGIN = dict(left=70, right=160, top=40, bottom=55)
PALETTE = ("#555555", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _nice_ticks(lo, hi, target=6):
    if not math.isfinite(lo) or not math.isfinite(hi):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks or [lo, hi]


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.px0 = MARGIN["left"]
        self.px1 = WIDTH - MARGIN["right"]
        self.py0 = HEIGHT - MARGIN["bottom"]
        self.py1 = MARGIN["top"]

    def sx(self, x):
        return self.px0 + (x - self.x0) / (self.x1 - self.x0) * (self.px1 - self.px0)

    def sy(self, y):
        return self.py0 + (y - self.y0) / (self.y1 - self.y0) * (self.py1 - self.py0)


def _axes(frame, parts, xlabel, ylabel, title):
    parts.append(
        f'<rect x="{frame.px0}" y="{frame.py1}" width="{frame.px1 - frame.px0}"'
        f' height="{frame.py0 - frame.py1}" fill="none" stroke="#000"/>'
    )
    for t in _nice_ticks(frame.x0, frame.x1):
        if not frame.x0 <= t <= frame.x1:
            continue
        x = frame.sx(t)
        parts.append(f'<line x1="{x:.1f}" y1="{frame.py0}" x2="{x:.1f}" y2="{frame.py0 + 5}" stroke="#000"/>')
        parts.append(f'<text x="{x:.1f}" y="{frame.py0 + 18}" font-size="11" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(frame.y0, frame.y1):
        if not frame.y0 <= t <= frame.y1:
            continue
        y = frame.sy(t)
        parts.append(f'<line x1="{frame.px0 - 5}" y1="{y:.1f}" x2="{frame.px0}" y2="{y:.1f}" stroke="#000"/>')
        parts.append(f'<text x="{frame.px0 - 8}" y="{y + 4:.1f}" font-size="11" text-anchor="end">{t:g}</text>')
    parts.append(
        f'<text x="{(frame.px0 + frame.px1) / 2:.0f}" y="{HEIGHT - 12}" font-size="13" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{(frame.py0 + frame.py1) / 2:.0f}" font-size="13" text-anchor="middle"'
        f' transform="rotate(-90 18 {(frame.py0 + frame.py1) / 2:.0f})">{ylabel}</text>'
    )
    if title:
        parts.append(f'<text x="{(frame.px0 + frame.px1) / 2:.0f}" y="22" font-size="14" text-anchor="middle">{title}</text>')


def _legend(parts, labels):
    x = WIDTH - MARGIN["right"] + 14
    y = MARGIN["top"] + 10
    for i, label in enumerate(labels):
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<line x1="{x}" y1="{y + 20 * i}" x2="{x + 22}" y2="{y + 20 * i}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{x + 28}" y="{y + 20 * i + 4}" font-size="12">{label}</text>')


def line_chart(path, x, series: dict, xlabel="", ylabel="", title=""):
    """Polyline chart of one or more named series over a shared x grid."""
    x = np.asarray(x, dtype=float)
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    frame = _Frame((float(x.min()), float(x.max())), (float(all_y.min()), float(all_y.max())))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">']
    _axes(frame, parts, xlabel, ylabel, title)
    for i, (label, ys) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{frame.sx(xi):.1f},{frame.sy(yi):.1f}" for xi, yi in zip(x, np.asarray(ys, float)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    _legend(parts, list(series.keys()))
    parts.append("</svg>")
    with open(path, "w") as handle:
        handle.write("\n".join(parts))


def kappa_chart(path, kappa_series: dict, intervals=None, title=""):
    """Per-component shrinkage-weight profile.

    ``kappa_series`` maps method name to a weight vector indexed by
    component (highest-variance first); ``intervals`` optionally holds
    (lower, upper) bars for one of the methods.
    """
    r = len(next(iter(kappa_series.values())))
    comps = np.arange(1, r + 1)
    all_y = np.concatenate([np.asarray(v, float) for v in kappa_series.values()])
    lo_all = min(0.0, float(all_y.min()))
    hi_all = max(1.05, float(all_y.max()))
    if intervals:
        for lo, hi in intervals.values():
            lo_all = min(lo_all, float(np.min(lo)))
            hi_all = max(hi_all, float(np.max(hi)))
    frame = _Frame((0.5, r + 0.5), (lo_all, hi_all))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">']
    _axes(frame, parts, "component (decreasing variance)", "shrinkage weight", title)
    for i, (label, ys) in enumerate(kappa_series.items()):
        color = PALETTE[i % len(PALETTE)]
        if intervals and label in intervals:
            lo, hi = intervals[label]
            for c, l, h in zip(comps, lo, hi):
                parts.append(
                    f'<line x1="{frame.sx(c):.1f}" y1="{frame.sy(l):.1f}"'
                    f' x2="{frame.sx(c):.1f}" y2="{frame.sy(h):.1f}" stroke="{color}" stroke-width="1"/>'
                )
        for c, v in zip(comps, np.asarray(ys, float)):
            parts.append(f'<circle cx="{frame.sx(c):.1f}" cy="{frame.sy(v):.1f}" r="3.2" fill="{PALETTE[i % len(PALETTE)]}"/>')
    _legend(parts, list(kappa_series.keys()))
    parts.append("</svg>")
    with open(path, "w") as handle:
        handle.write("\n".join(parts))
