"""Kinematics of the three-tendon top plate.

Three charts are chained: motor angles (rad) -> actuator lengths (mm) ->
spherical ``(r, theta, phi)`` -> Cartesian plate centre (mm). Every map
accepts a single 3-vector or an ``(N, 3)`` array.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import ChartError, ClampWarning, ReboError, UnreachableError

SQRT3 = math.sqrt(3.0)
CHART_TOL = 1e-12
LENGTH_TOL = 1e-9  # mm


@dataclass(frozen=True)
class RigConfig:
    """Rig constants. Lengths in mm, torque in N*m, stiffness in N/m."""

    d: float
    l_max: float
    l_min: float
    r_p: float
    tau_c: float
    k_single: float

    def __post_init__(self):
        if not self.d > 0.0:
            raise ReboError(f"d={self.d} must be positive")
        if not 0.0 < self.l_min <= self.l_max:
            raise ReboError(f"need 0 < l_min <= l_max, got [{self.l_min}, {self.l_max}]")
        if not self.r_p > 0.0:
            raise ReboError(f"r_p={self.r_p} must be positive")
        if not self.k_single > 0.0:
            raise ReboError(f"k_single={self.k_single} must be positive")
        if self.tau_c < 0.0:
            raise ReboError("tau_c must be non-negative")
        if self.tau_c > 0.0:
            travel = (self.tau_c / (self.r_p * 1e-3)) / self.k_single * 1e3
            if self.l_min < self.l_max - travel - LENGTH_TOL:
                raise ReboError(
                    f"l_min={self.l_min} mm below the torque-reachable "
                    f"{self.l_max - travel:.6g} mm")

    KEYS = {"d_mm": "d", "l_max_mm": "l_max", "l_min_mm": "l_min",
            "r_p_mm": "r_p", "tau_c_nm": "tau_c", "k_single_npm": "k_single"}

    @classmethod
    def from_mapping(cls, values: dict) -> "RigConfig":
        """Build from unit-suffixed keys (``d_mm``, ``tau_c_nm``, ...)."""
        unknown = set(values) - set(cls.KEYS)
        if unknown:
            raise ReboError(f"unknown rig keys: {sorted(unknown)}")
        missing = set(cls.KEYS) - set(values)
        if missing:
            raise ReboError(f"missing rig keys: {sorted(missing)}")
        return cls(**{cls.KEYS[k]: float(v) for k, v in values.items()})

    def to_mapping(self) -> dict:
        inv = {v: k for k, v in self.KEYS.items()}
        return {inv[f.name]: getattr(self, f.name) for f in fields(self)}


def motor_to_lengths(q_m, cfg: RigConfig) -> np.ndarray:
    """l_i = l_max + r_p * theta_i; out-of-range lengths are clamped with a warning."""
    q = np.asarray(q_m, dtype=float)
    lengths = cfg.l_max + cfg.r_p * q
    clipped = np.clip(lengths, cfg.l_min, cfg.l_max)
    if np.any(np.abs(clipped - lengths) > LENGTH_TOL):
        warnings.warn("motor command outside [l_min, l_max]; lengths clamped",
                      ClampWarning, stacklevel=2)
        return clipped
    return lengths


def lengths_to_motor(q_la, cfg: RigConfig) -> np.ndarray:
    return (np.asarray(q_la, dtype=float) - cfg.l_max) / cfg.r_p


def _direction_cosines(l, d):
    l1, l2, l3 = l[..., 0], l[..., 1], l[..., 2]
    r = (l1 + l2 + l3) / 3.0
    c1 = (-2.0 * l1 + l2 + l3) / (6.0 * d)
    c2 = (l3 - l2) / (2.0 * SQRT3 * d)
    return r, c1, c2


def _checked_arccos(c, name):
    c = np.asarray(c, dtype=float)
    bad = np.abs(c) > 1.0 + CHART_TOL
    if np.any(bad):
        worst = float(c[bad].flat[np.argmax(np.abs(c[bad]))])
        raise ChartError(f"pose outside spherical chart: cos({name}) = {worst:.12g}")
    return np.arccos(np.clip(c, -1.0, 1.0))


def lengths_to_spherical(q_la, cfg: RigConfig):
    """Return ``(r, theta, phi)`` for actuator lengths."""
    l = np.asarray(q_la, dtype=float)
    r, c1, c2 = _direction_cosines(l, cfg.d)
    return r, _checked_arccos(c1, "theta"), _checked_arccos(c2, "phi")


def spherical_to_cartesian(r, theta, phi) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    c1, c2 = np.cos(theta), np.cos(phi)
    return _cartesian(r, c1, c2)


def _cartesian(r, c1, c2):
    w2 = 1.0 - c1 * c1 - c2 * c2
    if np.any(w2 < -CHART_TOL):
        raise ChartError(
            f"pose outside spherical chart: cos^2(theta) + cos^2(phi) = {float(np.max(1.0 - w2)):.12g} > 1")
    w = np.sqrt(np.maximum(w2, 0.0))
    return np.stack([r * c1, r * c2, r * w], axis=-1)


def lengths_to_cartesian(q_la, cfg: RigConfig) -> np.ndarray:
    """Forward chain from actuator lengths to the plate centre.

    Uses the direction cosines directly; arccos followed by cos would lose
    digits near theta = 0.
    """
    l = np.asarray(q_la, dtype=float)
    r, c1, c2 = _direction_cosines(l, cfg.d)
    for c, name in ((c1, "theta"), (c2, "phi")):
        if np.any(np.abs(c) > 1.0 + CHART_TOL):
            _checked_arccos(c, name)
    return _cartesian(r, c1, c2)


def motor_to_cartesian(q_m, cfg: RigConfig) -> np.ndarray:
    return lengths_to_cartesian(motor_to_lengths(q_m, cfg), cfg)


def cartesian_to_lengths(p_c, cfg: RigConfig, check_bounds: bool = True) -> np.ndarray:
    """Invert the spherical map and the linear length map exactly."""
    p = np.asarray(p_c, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    if np.any(r == 0.0):
        raise UnreachableError("origin singular: |p_c| = 0")
    if np.any(z < 0.0):
        raise UnreachableError(f"z = {float(np.min(z)):.6g} mm < 0: below the plate plane")
    c1, c2 = x / r, y / r
    d = cfg.d
    l1 = r - 2.0 * d * c1
    l2 = r + d * c1 - SQRT3 * d * c2
    l3 = r + d * c1 + SQRT3 * d * c2
    lengths = np.stack([l1, l2, l3], axis=-1)
    if check_bounds:
        if np.any(r < cfg.l_min - LENGTH_TOL) or np.any(r > cfg.l_max + LENGTH_TOL):
            raise UnreachableError(
                f"|p_c| outside [l_min, l_max] = [{cfg.l_min}, {cfg.l_max}] mm")
        lo, hi = float(lengths.min()), float(lengths.max())
        if lo < cfg.l_min - LENGTH_TOL:
            raise UnreachableError(f"actuator length {lo:.6g} mm < l_min = {cfg.l_min} mm")
        if hi > cfg.l_max + LENGTH_TOL:
            raise UnreachableError(f"actuator length {hi:.6g} mm > l_max = {cfg.l_max} mm")
    return lengths


def cartesian_to_motor(p_c, cfg: RigConfig) -> np.ndarray:
    return lengths_to_motor(cartesian_to_lengths(p_c, cfg), cfg)


def jacobian_det(q_la, d: float) -> np.ndarray:
    """Analytic det of d(p_c)/d(q_la): r^2 / (w * 6*sqrt(3)*d^2) with w = z/r."""
    l = np.asarray(q_la, dtype=float)
    r, c1, c2 = _direction_cosines(l, d)
    w = np.sqrt(1.0 - c1 * c1 - c2 * c2)
    return r * r / (w * 6.0 * SQRT3 * d * d)


@dataclass(frozen=True)
class PlatePose:
    """A pose in one chart: ``motor``, ``actuator``, ``spherical`` or ``cartesian``."""

    chart: str
    values: tuple[float, float, float]

    CHARTS = ("motor", "actuator", "spherical", "cartesian")

    def __post_init__(self):
        if self.chart not in self.CHARTS:
            raise ReboError(f"unknown chart {self.chart!r}")

    def to_cartesian(self, cfg: RigConfig) -> np.ndarray:
        v = np.asarray(self.values, dtype=float)
        if self.chart == "motor":
            return motor_to_cartesian(v, cfg)
        if self.chart == "actuator":
            return lengths_to_cartesian(v, cfg)
        if self.chart == "spherical":
            return spherical_to_cartesian(*v)
        return v

    def to_motor(self, cfg: RigConfig) -> np.ndarray:
        if self.chart == "motor":
            return np.asarray(self.values, dtype=float)
        if self.chart == "actuator":
            return lengths_to_motor(self.values, cfg)
        return cartesian_to_motor(self.to_cartesian(cfg), cfg)


def circle_path(center, radius: float, n: int = 200, plane: str = "horizontal") -> np.ndarray:
    """Closed circle sampled at n points, in the x-y ("horizontal") or x-z ("vertical") plane."""
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    c = np.asarray(center, dtype=float)
    pts = np.tile(c, (n, 1))
    pts[:, 0] += radius * np.cos(t)
    if plane == "horizontal":
        pts[:, 1] += radius * np.sin(t)
    elif plane == "vertical":
        pts[:, 2] += radius * np.sin(t)
    else:
        raise ReboError(f"unknown plane {plane!r}")
    return pts


def tracking_error(actual, reference, radius: float | None = None) -> float:
    """RMS pointwise error as a fraction of the reference path's radius.

    ``radius`` defaults to the mean distance of the reference samples from
    their centroid, which is the circle radius for a circular reference.
    """
    a = np.atleast_2d(np.asarray(actual, dtype=float))
    ref = np.atleast_2d(np.asarray(reference, dtype=float))
    if a.size == 0 or ref.size == 0:
        raise ReboError("tracking_error needs at least one sample")
    if a.shape != ref.shape:
        raise ReboError(f"shape mismatch: {a.shape} vs {ref.shape}")
    if radius is None:
        radius = float(np.mean(np.linalg.norm(ref - ref.mean(axis=0), axis=1)))
    if not radius > 0.0:
        raise ReboError("reference radius must be positive")
    err = np.linalg.norm(a - ref, axis=1)
    return float(np.sqrt(np.mean(err * err)) / radius)
