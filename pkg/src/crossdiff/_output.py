"""Deterministic file emission: CSV, gnuplot series, manifests and SVG.

Floats are written with repr (shortest round-trip), so re-running an
experiment with identical inputs reproduces every output byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):  # includes numpy double scalars
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_series(path: Path, columns):
    """Whitespace-separated columns, one gnuplot-ready series per file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for row in zip(*columns):
            f.write(" ".join(fmt(v) for v in row) + "\n")


def write_manifest(path: Path, config_dict: dict):
    import numpy
    import scipy

    from . import __version__

    payload = {
        "config": config_dict,
        "versions": {
            "crossdiff": __version__,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _ticks(lo: float, hi: float, n: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * abs(step):
        out.append(round(t, 12))
        t += step
    return out


def write_svg(path: Path, series, title="", xlabel="", ylabel="", logx=False, logy=False):
    """Self-contained line plot; series is a list of (label, xs, ys)."""
    width, height = 640, 440
    left, right, top, bottom = 70, 20, 40, 50
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]

    def transform(vals, log):
        out = []
        for v in vals:
            if log:
                out.append(math.log10(v) if v > 0 else math.nan)
            else:
                out.append(float(v))
        return out

    xs_all, ys_all = [], []
    txy = []
    for label, xs, ys in series:
        tx = transform(xs, logx)
        ty = transform(ys, logy)
        pts = [(a, b) for a, b in zip(tx, ty) if math.isfinite(a) and math.isfinite(b)]
        txy.append((label, pts))
        xs_all += [p[0] for p in pts]
        ys_all += [p[1] for p in pts]
    if not xs_all:
        xs_all = ys_all = [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    padx = 0.03 * (x1 - x0)
    pady = 0.05 * (y1 - y0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady
    plot_w = width - left - right
    plot_h = height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * plot_w

    def py(y):
        return top + (y1 - y) / (y1 - y0) * plot_h

    def tick_label(t, log):
        return f"1e{t:g}" if log else f"{t:g}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        parts.append(
            f'<line x1="{px(t):.1f}" y1="{top + plot_h}" x2="{px(t):.1f}" y2="{top + plot_h + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px(t):.1f}" y="{top + plot_h + 18}" text-anchor="middle" font-size="11">{tick_label(t, logx)}</text>'
        )
    for t in _ticks(y0, y1):
        parts.append(
            f'<line x1="{left - 4}" y1="{py(t):.1f}" x2="{left}" y2="{py(t):.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{py(t) + 4:.1f}" text-anchor="end" font-size="11">{tick_label(t, logy)}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="13">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{top + plot_h / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {top + plot_h / 2:.1f})">{ylabel}</text>'
    )
    for idx, (label, pts) in enumerate(txy):
        if not pts:
            continue
        color = colors[idx % len(colors)]
        d = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in pts)
        parts.append(
            f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - right - 8}" y="{top + 16 + 16 * idx}" text-anchor="end" '
            f'font-size="12" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
