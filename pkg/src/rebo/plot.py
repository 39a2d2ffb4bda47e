"""Minimal deterministic SVG line/marker plots."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ReboError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939")


class Series(NamedTuple):
    label: str
    x: Sequence[float]
    y: Sequence[float]
    kind: str = "line"  # line | markers | both


@dataclass(frozen=True)
class PlotStyle:
    title: str = ""
    xlabel: str = "x"
    ylabel: str = "y"
    width: int = 560
    height: int = 380
    margin: int = 60
    marker_radius: float = 3.0


def _nice_ticks(lo, hi, n=5):
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    ticks = [start + i * step for i in range(int(round((stop - start) / step)) + 1)]
    return ticks, step


def _fmt(v):
    return f"{v:.2f}"


def _tick_label(v, step):
    digits = max(0, -int(math.floor(math.log10(step)))) if step < 1 else 0
    s = f"{v:.{digits}f}"
    return "0" if float(s) == 0 else s


def plot_xy(series: Sequence[Series], style: PlotStyle | None = None) -> bytes:
    """Render series to SVG bytes; markers are emitted in data order."""
    style = style or PlotStyle()
    if not series:
        raise ReboError("plot_xy needs at least one series")
    data = []
    for s in series:
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size == 0:
            raise ReboError(f"series {s.label!r}: x and y must be equal-length non-empty 1-D")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ReboError(f"series {s.label!r} contains NaN or infinite values")
        data.append((s, x, y))
    xs = np.concatenate([d[1] for d in data])
    ys = np.concatenate([d[2] for d in data])
    xt, xstep = _nice_ticks(float(xs.min()), float(xs.max()))
    yt, ystep = _nice_ticks(float(ys.min()), float(ys.max()))
    W, H, M = style.width, style.height, style.margin
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]

    def sx(v):
        return M + (v - x0) / (x1 - x0) * (W - 1.5 * M)

    def sy(v):
        return H - M - (v - y0) / (y1 - y0) * (H - 1.7 * M)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if style.title:
        out.append(f'<text x="{W / 2:.2f}" y="{M / 2:.2f}" text-anchor="middle" font-size="13">'
                   f'{_esc(style.title)}</text>')
    out.append(f'<g class="axes" stroke="black" stroke-width="1">'
               f'<line x1="{_fmt(sx(x0))}" y1="{_fmt(sy(y0))}" x2="{_fmt(sx(x1))}" y2="{_fmt(sy(y0))}"/>'
               f'<line x1="{_fmt(sx(x0))}" y1="{_fmt(sy(y0))}" x2="{_fmt(sx(x0))}" y2="{_fmt(sy(y1))}"/></g>')
    for v in xt:
        out.append(f'<text class="xtick" x="{_fmt(sx(v))}" y="{_fmt(sy(y0) + 15)}" '
                   f'text-anchor="middle">{_tick_label(v, xstep)}</text>')
    for v in yt:
        out.append(f'<text class="ytick" x="{_fmt(sx(x0) - 6)}" y="{_fmt(sy(v) + 4)}" '
                   f'text-anchor="end">{_tick_label(v, ystep)}</text>')
    out.append(f'<text class="xlabel" x="{_fmt((sx(x0) + sx(x1)) / 2)}" y="{H - 15}" '
               f'text-anchor="middle">{_esc(style.xlabel)}</text>')
    out.append(f'<text class="ylabel" x="15" y="{_fmt((sy(y0) + sy(y1)) / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 15 {_fmt((sy(y0) + sy(y1)) / 2)})">{_esc(style.ylabel)}</text>')
    for i, (s, x, y) in enumerate(data):
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<g class="series" data-label="{_esc(s.label)}">')
        if s.kind in ("line", "both") and x.size > 1:
            pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if s.kind in ("markers", "both") or x.size == 1:
            for a, b in zip(x, y):
                out.append(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" '
                           f'r="{style.marker_radius}" fill="{color}"/>')
        out.append("</g>")
    ly = M
    for i, (s, _, _) in enumerate(data):
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<text class="legend" x="{W - M / 2 - 4}" y="{ly + 14 * i}" text-anchor="end" '
                   f'fill="{color}">{_esc(s.label)}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
