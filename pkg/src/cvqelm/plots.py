"""Minimal hand-written SVG plots; output is a pure function of the results."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

W, H = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 190, 30, 60
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _f(v):
    return f"{v:.2f}"


def _header(title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
    ]


def _y_range(values):
    if not values:
        return 0.0, 1.0
    lo, hi = min(values), max(values)
    pad = max(0.01, 0.1 * (hi - lo))
    return max(0.0, lo - pad), min(1.0, hi + pad)


def _axes(parts, ylo, yhi, xlabel, ylabel, xticks):
    x0, x1, y0, y1 = LEFT, W - RIGHT, H - BOTTOM, TOP
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for k in range(6):
        v = ylo + (yhi - ylo) * k / 5
        y = _sy(v, ylo, yhi)
        parts.append(f'<line x1="{x0 - 4}" y1="{_f(y)}" x2="{x0}" y2="{_f(y)}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 7}" y="{_f(y + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.3f}</text>'
        )
    for x, label in xticks:
        parts.append(f'<line x1="{_f(x)}" y1="{y0}" x2="{_f(x)}" y2="{y0 + 4}" stroke="black"/>')
        parts.append(
            f'<text x="{_f(x)}" y="{y0 + 17}" text-anchor="middle" font-family="sans-serif" font-size="11">{escape(label)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.0f}" y="{H - 15}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">{escape(ylabel)}</text>'
    )


def _sy(v, lo, hi):
    return (H - BOTTOM) - (v - lo) / (hi - lo) * (H - BOTTOM - TOP)


def _legend(parts, models):
    for i, m in enumerate(models):
        y = TOP + 10 + 18 * i
        x = W - RIGHT + 15
        c = COLORS[i % len(COLORS)]
        parts.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{c}" stroke-width="2"/>')
        parts.append(
            f'<text x="{x + 26}" y="{y + 4}" font-family="sans-serif" font-size="11">{escape(m)}</text>'
        )


def accuracy_vs_size_svg(result):
    """Mean test accuracy against training size (log axis) with std error bars."""
    rows = result.summary()
    parts = _header("Test accuracy vs training size")
    models = list(dict.fromkeys(r[0] for r in rows))
    sizes = sorted({r[1] for r in rows})
    vals = []
    for _, _, _, mean, std in rows:
        s = std or 0.0
        vals += [mean - s, mean + s]
    ylo, yhi = _y_range(vals)
    x0, x1 = LEFT + 20, W - RIGHT - 20
    if len(sizes) > 1:
        la, lb = math.log10(sizes[0]), math.log10(sizes[-1])
        sx = {n: x0 + (math.log10(n) - la) / (lb - la) * (x1 - x0) for n in sizes}
    else:
        sx = {n: (x0 + x1) / 2 for n in sizes}
    _axes(parts, ylo, yhi, "training samples", "test accuracy", [(sx[n], str(n)) for n in sizes])
    for i, m in enumerate(models):
        c = COLORS[i % len(COLORS)]
        pts = [(sx[n], mean, std) for mm, n, _, mean, std in rows if mm == m]
        path = " ".join(f"{_f(x)},{_f(_sy(mean, ylo, yhi))}" for x, mean, _ in pts)
        parts.append(f'<polyline points="{path}" fill="none" stroke="{c}" stroke-width="2"/>')
        for x, mean, std in pts:
            y = _sy(mean, ylo, yhi)
            if std is not None:
                ya, yb = _sy(mean - std, ylo, yhi), _sy(mean + std, ylo, yhi)
                parts.append(f'<line x1="{_f(x)}" y1="{_f(ya)}" x2="{_f(x)}" y2="{_f(yb)}" stroke="{c}"/>')
                for yy in (ya, yb):
                    parts.append(f'<line x1="{_f(x - 4)}" y1="{_f(yy)}" x2="{_f(x + 4)}" y2="{_f(yy)}" stroke="{c}"/>')
            parts.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="3" fill="{c}"/>')
    _legend(parts, models)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def accuracy_distribution_svg(result):
    """Box (quartiles, min/max whiskers) plus strip of runs per (model, size)."""
    groups = result.groups()
    parts = _header("Test accuracy distribution per model and size")
    keys = list(groups)
    models = list(dict.fromkeys(m for m, _ in keys))
    vals = [r.test_accuracy for recs in groups.values() for r in recs]
    ylo, yhi = _y_range(vals)
    x0, x1 = LEFT + 10, W - RIGHT - 10
    step = (x1 - x0) / max(1, len(keys))
    centers = [x0 + step * (i + 0.5) for i in range(len(keys))]
    _axes(parts, ylo, yhi, "model / training samples", "test accuracy", [(c, str(n)) for c, (_, n) in zip(centers, keys)])
    half = min(18.0, step * 0.3)
    for cx, key in zip(centers, keys):
        c = COLORS[models.index(key[0]) % len(COLORS)]
        acc = np.array([r.test_accuracy for r in groups[key]])
        q1, med, q3 = np.percentile(acc, [25, 50, 75])
        lo, hi = acc.min(), acc.max()
        ya, yb = _sy(q3, ylo, yhi), _sy(q1, ylo, yhi)
        parts.append(f'<line x1="{_f(cx)}" y1="{_f(_sy(hi, ylo, yhi))}" x2="{_f(cx)}" y2="{_f(_sy(lo, ylo, yhi))}" stroke="{c}"/>')
        parts.append(
            f'<rect x="{_f(cx - half)}" y="{_f(ya)}" width="{_f(2 * half)}" height="{_f(max(yb - ya, 0.5))}" '
            f'fill="white" stroke="{c}"/>'
        )
        ym = _sy(med, ylo, yhi)
        parts.append(f'<line x1="{_f(cx - half)}" y1="{_f(ym)}" x2="{_f(cx + half)}" y2="{_f(ym)}" stroke="{c}" stroke-width="2"/>')
        k = len(acc)
        for j, a in enumerate(acc):
            dx = (j - (k - 1) / 2) * (1.6 * half / max(1, k - 1)) if k > 1 else 0.0
            parts.append(f'<circle cx="{_f(cx + dx)}" cy="{_f(_sy(a, ylo, yhi))}" r="2" fill="{c}" fill-opacity="0.6"/>')
    _legend(parts, models)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
