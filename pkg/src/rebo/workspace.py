"""Workspace of the tendon rig: boundary edges, volume, calibration of d."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._backend import kernels
from .errors import ChartError, ReboError
from .kinematics import RigConfig, lengths_to_cartesian

REFERENCE_VOLUME_MM3 = 4980.95


@dataclass(frozen=True)
class VolumeResult:
    volume: float  # mm^3
    method: str
    samples: int
    stderr: float = 0.0


def cube_corners(cfg: RigConfig) -> np.ndarray:
    return np.array(list(itertools.product((cfg.l_min, cfg.l_max), repeat=3)), dtype=float)


def cube_edges() -> list[tuple[int, tuple[int, int]]]:
    """The 12 edges as ``(free_axis, (fixed_a, fixed_b))`` with 0=l_min, 1=l_max."""
    edges = []
    for axis in range(3):
        for fixed in itertools.product((0, 1), repeat=2):
            edges.append((axis, fixed))
    return edges


def boundary_trajectories(cfg: RigConfig, grid_density: int = 50) -> list[np.ndarray]:
    """Images of the 12 cube edges: one actuator sweeps, the other two sit at a bound."""
    if grid_density < 2:
        raise ReboError("grid_density must be at least 2")
    bounds = (cfg.l_min, cfg.l_max)
    sweep = np.linspace(cfg.l_min, cfg.l_max, grid_density)
    out = []
    for edge_id, (axis, fixed) in enumerate(cube_edges()):
        l = np.empty((grid_density, 3))
        others = [a for a in range(3) if a != axis]
        l[:, axis] = sweep
        l[:, others[0]] = bounds[fixed[0]]
        l[:, others[1]] = bounds[fixed[1]]
        try:
            out.append(lengths_to_cartesian(l, cfg))
        except ChartError as exc:
            raise ChartError(f"edge {edge_id}: {exc}") from None
    return out


def chart_margin(cfg: RigConfig) -> float:
    """Smallest 1 - cos^2(theta) - cos^2(phi) over the length cube (attained at a corner)."""
    c = cube_corners(cfg)
    c1 = (-2 * c[:, 0] + c[:, 1] + c[:, 2]) / (6 * cfg.d)
    c2 = (c[:, 2] - c[:, 1]) / (2 * math.sqrt(3) * cfg.d)
    return float(np.min(1.0 - c1 ** 2 - c2 ** 2))


def volume_jacobian(cfg: RigConfig, grid_density: int = 64) -> VolumeResult:
    """Midpoint-rule integral of |det J| of the forward map over the length cube."""
    if grid_density < 1:
        raise ReboError("grid_density must be positive")
    vol, min_w = kernels.jacobian_volume(cfg.l_min, cfg.l_max, cfg.d, grid_density)
    if min_w <= 0.0:
        raise ChartError(
            f"Jacobian singular (z -> 0) inside the cube at d={cfg.d} mm; "
            "use the hull method")
    return VolumeResult(vol, "jacobian", grid_density ** 3)


def hull_volume(points) -> float:
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 4:
        raise ReboError("need at least 4 points for a hull")
    try:
        return float(ConvexHull(pts).volume)
    except QhullError as exc:
        raise ReboError(f"degenerate (coplanar) sample set: {exc.args[0].splitlines()[0]}") from None


def sample_cube(cfg: RigConfig, n_samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(cfg.l_min, cfg.l_max, size=(n_samples, 3))


def volume_hull(cfg: RigConfig, n_samples: int = 100_000, seed: int = 0,
                mapping: Callable[[np.ndarray], np.ndarray] | None = None,
                edge_density: int = 50) -> VolumeResult:
    """Convex-hull volume of mapped uniform cube samples plus the 12 boundary edges.

    ``mapping`` replaces the forward kinematics (used to inject synthetic
    maps). ``stderr`` is the change in hull volume between the first half of
    the samples and all of them, a gauge of the sampling shortfall.
    """
    if n_samples < 4:
        raise ReboError("n_samples must be at least 4")
    fwd = mapping or (lambda l: lengths_to_cartesian(l, cfg))
    pts = fwd(sample_cube(cfg, n_samples, seed))
    if mapping is None:
        pts = np.vstack([pts, *boundary_trajectories(cfg, edge_density)])
    vol = hull_volume(pts)
    half = pts[: max(4, n_samples // 2)]
    if mapping is None:
        half = np.vstack([half, pts[n_samples:]])
    try:
        stderr = abs(vol - hull_volume(half))
    except ReboError:
        stderr = float("nan")
    return VolumeResult(vol, "hull", n_samples, stderr)


def l_min_from_torque(cfg: RigConfig) -> float:
    """Shortest actuator length the continuous motor torque can hold (mm)."""
    force = cfg.tau_c / (cfg.r_p * 1e-3)
    l_min = cfg.l_max - force / cfg.k_single * 1e3
    if l_min <= 0.0:
        raise ReboError(f"torque model invalid: l_min = {l_min:.6g} mm")
    return l_min


def actuator_workspace(cfg: RigConfig) -> RigConfig:
    """Config whose length cube is the torque-limited one."""
    return replace(cfg, l_min=max(cfg.l_min, l_min_from_torque(cfg)))


def min_valid_d(cfg: RigConfig) -> float:
    """Smallest d keeping every cube corner inside the spherical chart."""
    c = cube_corners(cfg)
    s = ((-2 * c[:, 0] + c[:, 1] + c[:, 2]) / 6) ** 2 + ((c[:, 2] - c[:, 1]) / (2 * math.sqrt(3))) ** 2
    return math.sqrt(float(s.max()))


def calibrate_d(target_volume: float, cfg: RigConfig, bracket=(5.0, 200.0),
                grid_density: int = 64, tol: float = 0.1) -> float:
    """Bisection for the plate radius d whose Jacobian volume equals the target.

    The lower bracket end is raised to just above the smallest d for which
    the whole cube stays inside the spherical chart.
    """
    if not target_volume > 0.0:
        raise ReboError("target volume must be positive")

    def vol(d):
        return volume_jacobian(replace(cfg, d=d), grid_density).volume

    lo, hi = bracket
    lo = max(lo, min_valid_d(cfg) * (1.0 + 1e-6))
    if lo >= hi:
        raise ReboError(f"empty bracket [{lo}, {hi}]")
    v_lo, v_hi = vol(lo), vol(hi)
    if not v_lo > v_hi:
        raise ReboError("volume is not decreasing in d over the bracket")
    if not v_hi - tol <= target_volume <= v_lo + tol:
        raise ReboError(
            f"no sign change in bracket: target {target_volume} mm^3 outside "
            f"[{v_hi:.6g}, {v_lo:.6g}] for d in [{lo:.6g}, {hi}] mm")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = vol(mid)
        if abs(v - target_volume) < tol and hi - lo < 1e-9 * mid + 1e-12:
            return mid
        if v > target_volume:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * mid:
            break
    return 0.5 * (lo + hi)
