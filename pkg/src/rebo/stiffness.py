"""Empirical stiffness models and reduction of compression-test data.

Stiffness is in N/m, displacement in mm, force in N, angles in degrees.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ExtrapolationWarning, ReboError
from .pattern import ReboParams


@dataclass(frozen=True)
class StiffnessModel:
    """Affine cone-angle law ``k = slope * beta + intercept``."""

    slope: float
    intercept: float
    r_squared: float = float("nan")
    valid_band: tuple[float, float] = (15.0, 45.0)

    def zero_angle(self) -> float:
        return -self.intercept / self.slope


# fit published for 8 mil sheet, a_o=20, b_o=6, dz=10, n_r=6, n_l=8
REFERENCE_MODEL = StiffnessModel(slope=16.0571, intercept=-43.7143, r_squared=0.9548)


def predict_stiffness(beta: float, model: StiffnessModel = REFERENCE_MODEL) -> float:
    lo, hi = model.valid_band
    if not lo <= beta <= hi:
        warnings.warn(f"beta={beta} deg outside fitted band {model.valid_band}",
                      ExtrapolationWarning, stacklevel=2)
    k = model.slope * beta + model.intercept
    if k <= 0.0:
        raise ReboError(f"model invalid at this angle: beta={beta} deg predicts k={k:.4g} N/m")
    return k


def _linfit(x, y):
    """OLS line; returns slope, intercept, r_squared, slope standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ReboError("degenerate fit: all abscissae equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else float("nan")
    dof = len(x) - 2
    se = math.sqrt(ss_res / dof / sxx) if dof > 0 else float("nan")
    return slope, intercept, r2, se


def fit_affine(points: Sequence[tuple[float, float]]) -> StiffnessModel:
    """Least-squares affine law from ``(beta_deg, k_npm)`` pairs."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ReboError("degenerate fit: need at least two points")
    slope, intercept, r2, _ = _linfit(pts[:, 0], pts[:, 1])
    band = (float(pts[:, 0].min()), float(pts[:, 0].max()))
    return StiffnessModel(slope, intercept, max(0.0, min(1.0, r2)), band)


def stack_stiffness(layers: Sequence[float]) -> float:
    """Concentric layers act as parallel springs."""
    layers = list(layers)
    if not layers:
        raise ReboError("stack_stiffness needs at least one layer")
    if any(k <= 0 for k in layers):
        raise ReboError(f"layer stiffnesses must be positive: {layers}")
    return math.fsum(layers)


@dataclass
class ForceDisplacementTrace:
    displacement: np.ndarray  # mm
    force: np.ndarray  # N
    rest_length: float = float("nan")  # mm, measured l_real
    trial_id: str = ""

    def __post_init__(self):
        self.displacement = np.asarray(self.displacement, dtype=float)
        self.force = np.asarray(self.force, dtype=float)
        if self.displacement.shape != self.force.shape or self.displacement.ndim != 1:
            raise ReboError("displacement and force must be 1-D arrays of equal length")
        if not np.all(np.isfinite(self.force)):
            raise ReboError(f"trace {self.trial_id!r}: non-finite force samples")


def read_traces(path, rest_length: float = float("nan")) -> list[ForceDisplacementTrace]:
    """Read ``displacement_mm,force_n[,trial]`` CSV; one trace per trial value."""
    groups: dict[str, tuple[list, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if reader.fieldnames is None or not {"displacement_mm", "force_n"} <= set(reader.fieldnames):
            raise ReboError(f"{path}: header must contain displacement_mm,force_n")
        for row in reader:
            key = row.get("trial") or ""
            xs, fs = groups.setdefault(key, ([], []))
            xs.append(float(row["displacement_mm"]))
            fs.append(float(row["force_n"]))
    if not groups:
        raise ReboError(f"{path}: no samples")
    return [ForceDisplacementTrace(np.array(xs), np.array(fs), rest_length, trial)
            for trial, (xs, fs) in groups.items()]


class StiffnessEstimate(NamedTuple):
    k: float  # N/m
    fit_range: tuple[float, float]  # mm
    r_squared: float
    stderr: float  # N/m


def _hookean_mask(trace, linear_fraction):
    if not 0.0 < linear_fraction <= 1.0:
        raise ReboError(f"linear_fraction={linear_fraction} outside (0, 1]")
    if len(trace.displacement) < 10:
        raise ReboError("need at least 10 samples")
    x = trace.displacement
    upper = linear_fraction * x.max()
    mask = (x >= 0.0) & (x <= upper * (1 + 1e-12))
    if mask.sum() < 2:
        raise ReboError("too few samples in the Hookean region")
    return mask, upper


def estimate_stiffness(trace: ForceDisplacementTrace,
                       linear_fraction: float = 2.0 / 3.0) -> StiffnessEstimate:
    """Slope of force vs displacement over ``[0, linear_fraction * max travel]``."""
    mask, upper = _hookean_mask(trace, linear_fraction)
    slope, _, r2, se = _linfit(trace.displacement[mask], trace.force[mask])
    scale = float(np.ptp(trace.force[mask])) or 1.0
    if slope <= 1e-12 * scale:
        raise ReboError(f"non-spring-like trace {trace.trial_id!r}: slope {slope * 1e3:.4g} N/m")
    return StiffnessEstimate(slope * 1e3, (0.0, float(upper)), r2, se * 1e3)


def effective_area(params: ReboParams) -> float:
    """Load-bearing area 3*sqrt(3)*(a_o - b_o)^2 in mm^2."""
    return 3.0 * math.sqrt(3.0) * (params.a_o - params.b_o) ** 2


class StressStrain(NamedTuple):
    strain: np.ndarray
    stress: np.ndarray  # Pa
    youngs_modulus: float  # Pa


def stress_strain(trace: ForceDisplacementTrace, params: ReboParams,
                  linear_fraction: float = 2.0 / 3.0) -> StressStrain:
    area = effective_area(params)
    if not area > 0.0:
        raise ReboError("zero effective area")
    if not trace.rest_length > 0.0:
        raise ReboError(f"rest length must be positive, got {trace.rest_length}")
    strain = trace.displacement / trace.rest_length
    stress = trace.force / (area * 1e-6)
    mask, _ = _hookean_mask(trace, linear_fraction)
    modulus, _, _, _ = _linfit(strain[mask], stress[mask])
    return StressStrain(strain, stress, modulus)


class HysteresisLoss(NamedTuple):
    energy: float  # J
    negative: bool


def hysteresis_loss(loading: ForceDisplacementTrace,
                    unloading: ForceDisplacementTrace) -> HysteresisLoss:
    """Area between loading and unloading branches, in joules.

    Both branches are resampled by linear interpolation onto the union of
    their displacement samples within the shared span. A negative area is
    returned as-is with ``negative=True``.
    """
    branches = []
    for tr in (loading, unloading):
        if len(tr.displacement) < 2:
            raise ReboError("each branch needs at least 2 samples")
        order = np.argsort(tr.displacement, kind="stable")
        branches.append((tr.displacement[order], tr.force[order]))
    (xl, fl), (xu, fu) = branches
    lo, hi = max(xl[0], xu[0]), min(xl[-1], xu[-1])
    if not hi > lo:
        raise ReboError("branches do not share a displacement interval")
    grid = np.union1d(xl, xu)
    grid = grid[(grid >= lo) & (grid <= hi)]
    grid = np.union1d(grid, [lo, hi])
    diff = np.interp(grid, xl, fl) - np.interp(grid, xu, fu)
    energy = float(np.trapezoid(diff, grid)) * 1e-3
    if energy < 0.0:
        warnings.warn("unloading branch lies above loading branch", stacklevel=2)
    return HysteresisLoss(energy, energy < 0.0)
