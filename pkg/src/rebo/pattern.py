"""Crease-pattern generation for origami bellows (REBO) springs.

Lengths are millimetres. The cone angle ``beta`` on :class:`ReboParams` is
in degrees; everything in :class:`FoldGeometry` is in radians.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

from .errors import ExtrapolationWarning, ReboError

CHARACTERIZED_BETA = (15.0, 45.0)
DEFAULT_THICKNESS_MM = 0.2032  # 8 mil sheet

MOUNTAIN = "mountain"
VALLEY = "valley"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class ReboParams:
    """Design vector of one bellows layer.

    ``a_o`` is the major half-dimension of the outer trapezoid, ``b_o`` the
    minor one, ``delta_z`` the folded height of one layer, ``n_r`` the number
    of polygon sides (pattern columns) and ``n_l`` the number of layers.
    """

    a_o: float
    b_o: float
    delta_z: float
    n_r: int
    n_l: int
    beta: float
    thickness: float = DEFAULT_THICKNESS_MM
    material: str = "8 mil polyester-coated paper"
    provenance: str = "user"

    def __post_init__(self):
        if not 0.0 < self.beta <= 90.0:
            raise ReboError(
                f"cone angle beta={self.beta} deg outside (0, 90]; "
                "beta <= 0 is a degenerate flat fold")
        if self.n_r < 3:
            raise ReboError(f"n_r={self.n_r}: need at least 3 sides")
        if self.n_l < 1:
            raise ReboError(f"n_l={self.n_l}: need at least one layer")
        if not self.a_o > self.b_o >= 0.0:
            raise ReboError(f"need a_o > b_o >= 0, got a_o={self.a_o}, b_o={self.b_o}")
        if not self.delta_z > 0.0:
            raise ReboError(f"delta_z={self.delta_z} must be positive")
        if self.thickness < 0.0:
            raise ReboError("thickness must be non-negative")

    @property
    def characterized(self) -> bool:
        lo, hi = CHARACTERIZED_BETA
        return lo <= self.beta <= hi

    @property
    def envelope_radius(self) -> float:
        """Circumradius of the folded layer's outer polygon (mm)."""
        return self.a_o


@dataclass(frozen=True)
class FoldGeometry:
    theta: float
    alpha: float
    h: float
    rest_length: float


def fold_geometry(params: ReboParams) -> FoldGeometry:
    """Trapezoid rotation, crease angle, flat unit height and rest length."""
    if not params.characterized:
        warnings.warn(
            f"beta={params.beta} deg is outside the characterized band "
            f"{CHARACTERIZED_BETA}; extrapolated", ExtrapolationWarning, stacklevel=2)
    beta = math.radians(params.beta)
    theta = 2.0 * math.pi * math.cos(beta) / params.n_r
    alpha = (math.pi - theta) / 2.0
    h = params.delta_z / math.sin(beta)
    return FoldGeometry(theta=theta, alpha=alpha, h=h,
                        rest_length=params.n_l * params.delta_z)


class Crease(NamedTuple):
    x0: float
    y0: float
    x1: float
    y1: float
    kind: str


@dataclass(frozen=True)
class CreasePattern:
    sheet_width: float
    sheet_height: float
    creases: tuple[Crease, ...]
    params: ReboParams
    geometry: FoldGeometry
    diagonal_count: int = field(default=0)

    def count(self, kind: str) -> int:
        return sum(1 for c in self.creases if c.kind == kind)

    def metadata(self) -> dict:
        meta = {"params": asdict(self.params), "geometry": asdict(self.geometry)}
        return meta


def _clip_through_center(cx, cy, angle, half_w, half_h):
    # segment through (cx, cy) at the given angle, clipped to the unit box
    dx, dy = math.cos(angle), math.sin(angle)
    limits = []
    if abs(dx) > 1e-15:
        limits.append(half_w / abs(dx))
    if abs(dy) > 1e-15:
        limits.append(half_h / abs(dy))
    s = min(limits)
    return cx - s * dx, cy - s * dy, cx + s * dx, cy + s * dy


def generate_pattern(params: ReboParams, invert: bool = False) -> CreasePattern:
    """Lay out n_r columns by 2*n_l half-layer rows of units.

    Each unit is ``a_o`` wide and ``h`` tall and carries one mid-crease
    through its centre at angle alpha from horizontal; the crease direction
    mirrors on alternate half-rows. Row boundaries alternate mountain/valley,
    column boundaries are valleys, mid-creases are mountains; ``invert``
    swaps mountain and valley everywhere.
    """
    geom = fold_geometry(params)
    unit_w, unit_h = params.a_o, geom.h
    n_rows = 2 * params.n_l
    width, height = params.n_r * unit_w, n_rows * unit_h
    m, v = (VALLEY, MOUNTAIN) if invert else (MOUNTAIN, VALLEY)

    creases = [
        Crease(0.0, 0.0, width, 0.0, BOUNDARY),
        Crease(width, 0.0, width, height, BOUNDARY),
        Crease(width, height, 0.0, height, BOUNDARY),
        Crease(0.0, height, 0.0, 0.0, BOUNDARY),
    ]
    for row in range(1, n_rows):
        y = row * unit_h
        creases.append(Crease(0.0, y, width, y, m if row % 2 else v))
    for col in range(1, params.n_r):
        x = col * unit_w
        creases.append(Crease(x, 0.0, x, height, v))
    n_diag = 0
    for row in range(n_rows):
        angle = geom.alpha if row % 2 == 0 else math.pi - geom.alpha
        cy = (row + 0.5) * unit_h
        for col in range(params.n_r):
            cx = (col + 0.5) * unit_w
            creases.append(Crease(*_clip_through_center(cx, cy, angle, unit_w / 2, unit_h / 2), m))
            n_diag += 1
    return CreasePattern(width, height, tuple(creases), params, geom, n_diag)


def nests(inner: ReboParams, outer: ReboParams, clearance: float = 0.0) -> bool:
    """True if ``inner`` fits coaxially inside ``outer`` with the given radial gap.

    Both layers share n_r and are vertex-aligned, so the comparison is
    between circumradii, less the outer layer's wall thickness.
    """
    if inner.n_r != outer.n_r:
        return False
    return inner.envelope_radius + clearance + outer.thickness <= outer.envelope_radius


def inner_layer_params(outer: ReboParams, clearance: float,
                       beta: float | None = None) -> ReboParams:
    """Parameters for a concentric inner layer that nests inside ``outer``."""
    if clearance < 0.0:
        raise ReboError("clearance must be non-negative")
    a_o = outer.a_o - clearance - outer.thickness
    if a_o <= outer.b_o:
        raise ReboError(
            f"inner layer degenerate: a_o={a_o:.4g} mm <= b_o={outer.b_o:.4g} mm "
            f"at clearance {clearance} mm")
    return replace(outer, a_o=a_o, beta=outer.beta if beta is None else beta,
                   provenance="derived-inner")


@dataclass(frozen=True)
class StyleConfig:
    mountain_width: float = 0.3
    valley_width: float = 0.3
    boundary_width: float = 0.6
    valley_dash: str = "2,1"
    mountain_color: str = "#c0392b"
    valley_color: str = "#2e5eaa"
    boundary_color: str = "#000000"


def _num(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def export_svg(pattern: CreasePattern, style: StyleConfig | None = None) -> bytes:
    """Serialize a pattern to SVG in millimetre user units.

    Output depends only on the inputs, so identical patterns give identical
    bytes. One ``<line>`` per crease.
    """
    style = style or StyleConfig()
    w, h = pattern.sheet_width, pattern.sheet_height
    meta = json.dumps(pattern.metadata(), sort_keys=True)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(w)}mm" '
        f'height="{_num(h)}mm" viewBox="0 0 {_num(w)} {_num(h)}">',
        f"<!-- rebo-params: {meta.replace('--', '- -')} -->",
        "<style>",
        f".mountain {{ stroke: {style.mountain_color}; stroke-width: {style.mountain_width}; fill: none; }}",
        f".valley {{ stroke: {style.valley_color}; stroke-width: {style.valley_width}; "
        f"stroke-dasharray: {style.valley_dash}; fill: none; }}",
        f".boundary {{ stroke: {style.boundary_color}; stroke-width: {style.boundary_width}; fill: none; }}",
        "</style>",
    ]
    for c in pattern.creases:
        lines.append(f'<line class="{c.kind}" x1="{_num(c.x0)}" y1="{_num(c.y0)}" '
                     f'x2="{_num(c.x1)}" y2="{_num(c.y1)}"/>')
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_svg(pattern: CreasePattern, path, style: StyleConfig | None = None) -> None:
    data = export_svg(pattern, style)
    with open(path, "wb") as fh:
        fh.write(data)
