"""Static SVG line charts of measure and summary CSVs.

Each series becomes one ``<polyline>`` per contiguous run of defined
values; a missing cell breaks the line instead of plotting a zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .io import read_csv
from .measures import MEASURE_COLUMNS
from .summary import SUMMARY_COLUMNS

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
DASHES = ("", "6,3", "2,2", "8,3,2,3")


class SchemaError(ValueError):
    pass


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray


def series_from_csv(path, columns=None) -> list:
    """Plottable series of a measure or summary CSV."""
    cols = read_csv(path)
    header = list(cols)
    if "r" not in cols:
        raise SchemaError(f"{path}: no 'r' column")
    stem = Path(path).stem
    if set(header) <= set(MEASURE_COLUMNS):
        names = [c for c in header if c != "r"] if columns is None else list(columns)
        missing = [c for c in names if c not in cols]
        if missing:
            raise SchemaError(f"{path}: no column(s) {', '.join(missing)}")
        return [Series(f"{stem}:{c}", cols["r"], cols[c]) for c in names]
    if set(header) == set(SUMMARY_COLUMNS):
        if columns is not None and list(columns) != ["value"]:
            raise SchemaError(f"{path}: summary CSVs only have a 'value' series")
        kinds = sorted(set(cols["kind"]))
        pairs = sorted(set(cols["pair"]))
        label = f"{'/'.join(kinds)}{'/'.join(pairs)}"
        return [Series(f"{stem}:{label}", cols["r"], cols["value"])]
    raise SchemaError(f"{path}: header {header} matches neither the measure nor the summary schema")


def _runs(x, y):
    ok = np.isfinite(x) & np.isfinite(y)
    i, n = 0, len(ok)
    while i < n:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j < n and ok[j]:
            j += 1
        yield i, j
        i = j


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def render_svg(series, title="", xlabel="r", ylabel="", width=720, height=440) -> str:
    ml, mr, mt, mb = 70, 180, 30, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([s.x[np.isfinite(s.x) & np.isfinite(s.y)] for s in series] or [np.zeros(0)])
    ys = np.concatenate([s.y[np.isfinite(s.x) & np.isfinite(s.y)] for s in series] or [np.zeros(0)])
    x0, x1 = (float(xs.min()), float(xs.max())) if len(xs) else (0.0, 1.0)
    y0, y1 = (min(0.0, float(ys.min())), float(ys.max())) if len(ys) else (0.0, 1.0)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line class="axis" x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line class="axis" x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{X(t):.1f}" y="{mt + ph + 16}" text-anchor="middle" font-size="11">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{ml - 6}" y="{Y(t) + 4:.1f}" text-anchor="end" font-size="11">{t:.4g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{mt + ph / 2:.1f}" font-size="12" transform="rotate(-90 14 {mt + ph / 2:.1f})" text-anchor="middle">{escape(ylabel)}</text>')
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        dash = DASHES[(k // len(PALETTE)) % len(DASHES)]
        style = f'stroke="{color}" fill="none" stroke-width="1.5"' + (f' stroke-dasharray="{dash}"' if dash else "")
        name = escape(s.name, {'"': "&quot;"})
        for i, j in _runs(s.x, s.y):
            if j - i == 1:
                out.append(f'<circle data-series="{name}" cx="{X(s.x[i]):.2f}" cy="{Y(s.y[i]):.2f}" r="2" fill="{color}"/>')
                continue
            pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(s.x[i:j], s.y[i:j]))
            out.append(f'<polyline data-series="{name}" {style} points="{pts}"/>')
        ly = mt + 14 + 18 * k
        out.append(f'<line class="legend" x1="{ml + pw + 12}" y1="{ly}" x2="{ml + pw + 36}" y2="{ly}" {style}/>')
        out.append(f'<text x="{ml + pw + 42}" y="{ly + 4}" font-size="11">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
