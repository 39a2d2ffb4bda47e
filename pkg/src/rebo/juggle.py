"""Hybrid flight/hit model of vertical juggling on a pre-compressed spring paddle.

SI units throughout (m, s, kg). Heights are measured from the paddle rest
position ``z_rest``; the paddle waits ``p_com`` below it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from ._backend import LIFTOFF, kernels
from .errors import NoFixedPointError, ReboError

G = 9.81


@dataclass(frozen=True)
class BallSpec:
    mass: float
    restitution: float = 1.0
    label: str = ""

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ReboError(f"ball mass {self.mass} must be positive")
        if not 0.0 <= self.restitution <= 1.0:
            raise ReboError(f"restitution {self.restitution} outside [0, 1]")


@dataclass(frozen=True)
class JugglerSpec:
    k_es: float  # N/m, three springs in parallel
    b_s: float = 0.0  # N*s/m
    p_com: float = 0.0  # m
    z_rest: float = 0.0  # m

    def __post_init__(self):
        if not self.k_es > 0.0:
            raise ReboError(f"k_es {self.k_es} must be positive")
        if self.b_s < 0.0:
            raise ReboError(f"b_s {self.b_s} must be non-negative")
        if self.p_com < 0.0:
            raise ReboError(f"p_com {self.p_com} must be non-negative")


def flight(h0: float, spec: JugglerSpec) -> tuple[float, float]:
    """Fall from apex ``h0`` onto the waiting paddle: (touchdown speed, fall time)."""
    drop = h0 + spec.p_com
    if drop < 0.0:
        raise ReboError(f"apex {h0} m lies below the paddle at {-spec.p_com} m")
    v = math.sqrt(2.0 * G * drop)
    return v, v / G


class Stance:
    """Closed-form stance motion x(t) = chi - z_rest after a touchdown.

    x'' = -(k/m) x - (b/m) x' - g, started at x = -p_com with x' = -e v_in.
    Written about the static equilibrium as y = x + m g / k.
    """

    def __init__(self, v_in: float, ball: BallSpec, spec: JugglerSpec):
        self.k_m = spec.k_es / ball.mass
        self.sag = G / self.k_m
        self.sigma = 0.5 * spec.b_s / ball.mass
        self.y0 = -spec.p_com + self.sag
        self.v0 = -ball.restitution * v_in
        self.q = -self.sigma * self.v0 - self.k_m * self.y0
        disc = self.sigma ** 2 - self.k_m
        if disc < 0.0:
            self.kind, self.mu = "under", math.sqrt(-disc)
        elif disc > 0.0:
            self.kind, self.mu = "over", math.sqrt(disc)
        else:
            self.kind, self.mu = "critical", 0.0

    def _cs(self, t):
        mu = self.mu
        if self.kind == "under":
            return math.cos(mu * t), math.sin(mu * t) / mu
        if self.kind == "over":
            return math.cosh(mu * t), math.sinh(mu * t) / mu
        return 1.0, t

    def state(self, t: float) -> tuple[float, float]:
        c, s = self._cs(t)
        decay = math.exp(-self.sigma * t)
        y = decay * (self.y0 * c + (self.v0 + self.sigma * self.y0) * s)
        v = decay * (self.v0 * c + self.q * s)
        return y - self.sag, v

    def _velocity_zeros(self):
        """First positive times where x' = 0 (at most two are needed)."""
        eps = 1e-12 / math.sqrt(self.k_m)
        v0, q, mu = self.v0, self.q, self.mu
        if self.kind == "under":
            psi = math.atan2(q / mu, v0)
            base = (psi + 0.5 * math.pi) / mu
            step = math.pi / mu
            k = math.ceil((eps - base) / step)
            first = base + k * step
            if first <= eps:
                first += step
            return [first, first + step]
        if q == 0.0:
            return []
        if self.kind == "over":
            ratio = -mu * v0 / q
            return [math.atanh(ratio) / mu] if 0.0 < ratio < 1.0 else []
        t = -v0 / q
        return [t] if t > eps else []

    def liftoff(self) -> tuple[float, float] | None:
        """Time and speed of the first upward crossing of x = 0, or None."""
        prev = 0.0
        for tz in self._velocity_zeros():
            x, _ = self.state(tz)
            if x + self.sag > 0.0:
                # a velocity maximum of y; liftoff needs x above rest there
                if x <= 0.0:
                    return None
                tc = brentq(lambda t: self.state(t)[0], prev, tz,
                            xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
                return tc, self.state(tc)[1]
            prev = tz
        return None


class HitResult(NamedTuple):
    v_out: float | None  # None means the juggle died
    t_hit: float

    @property
    def died(self) -> bool:
        return self.v_out is None


def hit(v_in: float, ball: BallSpec, spec: JugglerSpec, method: str = "analytic",
        dt: float = 1e-5) -> HitResult:
    """Stance phase from touchdown to the spring regaining its rest length."""
    if v_in < 0.0:
        raise ReboError("touchdown speed must be non-negative")
    if method == "analytic":
        res = Stance(v_in, ball, spec).liftoff()
        if res is None:
            return HitResult(None, math.nan)
        t, v = res
        return HitResult(v, t)
    if method == "rk4":
        k_m = spec.k_es / ball.mass
        t_max = max(2.0, 20.0 * 2.0 * math.pi / math.sqrt(k_m))
        t, v, status = kernels.rk4_hit(-spec.p_com, -ball.restitution * v_in, k_m,
                                       spec.b_s / ball.mass, G, dt, t_max)
        if status != LIFTOFF:
            return HitResult(None, math.nan)
        return HitResult(v, t)
    raise ReboError(f"unknown hit method {method!r}")


def apex_map(h: float, ball: BallSpec, spec: JugglerSpec,
             method: str = "analytic") -> float | None:
    """Return map from one apex height to the next; None if the ball dies."""
    v_in, _ = flight(h, spec)
    res = hit(v_in, ball, spec, method)
    if res.died:
        return None
    return res.v_out ** 2 / (2.0 * G)


@dataclass(frozen=True)
class FixedPoint:
    h: float
    multiplier: float
    degenerate: bool = False

    @property
    def stable(self) -> bool:
        return not self.degenerate and abs(self.multiplier) < 1.0


def _excess(h, ball, spec, method):
    nxt = apex_map(h, ball, spec, method)
    return -math.inf if nxt is None else nxt - h


def find_fixed_point(ball: BallSpec, spec: JugglerSpec, bracket=(0.0, 2.0),
                     method: str = "analytic", tol: float = 1e-7,
                     fd_step: float = 1e-5) -> FixedPoint:
    """Bisection for P(h) = h, plus the finite-difference multiplier dP/dh."""
    a, b = bracket
    fa, fb = _excess(a, ball, spec, method), _excess(b, ball, spec, method)
    if abs(fa) < tol and abs(fb) < tol:
        mid = 0.5 * (a + b)
        if abs(_excess(mid, ball, spec, method)) < tol:
            return FixedPoint(mid, _multiplier(mid, ball, spec, method, fd_step), True)
    if fa == 0.0:
        b = a
    elif fb == 0.0:
        a = b
    elif (fa > 0) == (fb > 0):
        raise NoFixedPointError(
            f"no fixed point in bracket [{a}, {b}] m: P(h) - h = {fa:.3g}, {fb:.3g}")
    for _ in range(200):
        if b - a <= 1e-12:
            break
        mid = 0.5 * (a + b)
        fm = _excess(mid, ball, spec, method)
        if fm == 0.0:
            a = b = mid
            break
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    h = 0.5 * (a + b)
    if abs(_excess(h, ball, spec, method)) >= tol:
        raise NoFixedPointError(f"bisection stalled at h={h} m (map not continuous here)")
    return FixedPoint(h, _multiplier(h, ball, spec, method, fd_step))


def _multiplier(h, ball, spec, method, step):
    lo = max(h - step, -spec.p_com)
    hi = lo + 2.0 * step if lo > h - step else h + step
    p_hi = apex_map(hi, ball, spec, method)
    p_lo = apex_map(lo, ball, spec, method)
    if p_hi is None or p_lo is None:
        return math.nan
    return (p_hi - p_lo) / (hi - lo)


def calibrate_losses(target_h: float, ball: BallSpec, spec: JugglerSpec,
                     free: str = "restitution", method: str = "analytic",
                     tol: float = 1e-5) -> tuple[BallSpec, JugglerSpec]:
    """Tune one loss channel so the apex fixed point sits at ``target_h``.

    ``free`` is ``"restitution"`` (ball e) or ``"damping"`` (spring B_s).
    """
    if free == "restitution":
        def with_loss(x):
            return replace(ball, restitution=x), spec
        lo, hi = 0.0, 1.0
        sign = 1.0  # apex grows with e
    elif free == "damping":
        def with_loss(x):
            return ball, replace(spec, b_s=x)
        lo, hi = 0.0, 20.0 * math.sqrt(spec.k_es * ball.mass)
        sign = -1.0
    else:
        raise ReboError(f"unknown loss channel {free!r}")

    def g(x):
        return sign * _excess(target_h, *with_loss(x), method)

    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo < 0.0 < g_hi):
        raise ReboError(
            f"target apex {target_h * 1e3:.4g} mm unachievable by tuning {free} over "
            f"[{lo:.4g}, {hi:.4g}]: " + _feasible_range(ball, spec, with_loss, lo, hi, method))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-14:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    if free == "restitution" and x >= 1.0 - 1e-12:
        raise ReboError("target only reachable in the lossless limit e = 1")
    b2, s2 = with_loss(x)
    fp = find_fixed_point(b2, s2, bracket=(0.0, max(2.0, 4 * target_h)), method=method)
    if abs(fp.h - target_h) > tol:
        raise ReboError(f"calibration landed on h*={fp.h} m, not {target_h} m")
    return b2, s2


def _feasible_range(ball, spec, with_loss, lo, hi, method):
    out = []
    for x in (lo, hi):
        try:
            fp = find_fixed_point(*with_loss(x), method=method)
            out.append(f"{fp.h * 1e3:.4g} mm")
        except ReboError:
            out.append("none")
    return f"fixed points at the ends of the range: {out[0]} .. {out[1]}"


def preload_energy(spec: JugglerSpec) -> float:
    """Energy stored by pre-compressing the paddle springs (J)."""
    return 0.5 * spec.k_es * spec.p_com ** 2


def mean_power(spec: JugglerSpec, ball: BallSpec, t_hit: float | None = None) -> float:
    """Preload energy delivered over one stance (W).

    Without ``t_hit``, the stance duration at the apex fixed point is used.
    """
    if t_hit is None:
        fp = find_fixed_point(ball, spec)
        t_hit = hit(flight(fp.h, spec)[0], ball, spec).t_hit
    return preload_energy(spec) / t_hit


class JuggleEvent(NamedTuple):
    t: float
    kind: str  # apex | touchdown | liftoff | death
    chi: float
    chidot: float
    mode: str  # mode entered at this event: flight | hit
    cycle: int


@dataclass
class JuggleTrace:
    events: list[JuggleEvent] = field(default_factory=list)
    apex_sequence: list[float] = field(default_factory=list)
    died: bool = False

    def to_jsonl(self) -> str:
        rows = [json.dumps({"t": e.t, "kind": e.kind, "chi_m": e.chi, "chidot_mps": e.chidot,
                            "mode": e.mode, "cycle": e.cycle}) for e in self.events]
        return "\n".join(rows) + "\n"


def simulate(ball: BallSpec, spec: JugglerSpec, h0: float, n_cycles: int,
             seed: int | None = None, sigma_e: float = 0.0,
             method: str = "analytic") -> JuggleTrace:
    """Run the flight/hit state machine for ``n_cycles`` bounces from apex ``h0``.

    With ``sigma_e > 0`` each touchdown draws its restitution from a normal
    around ``ball.restitution`` (clipped to [0, 1]) using ``seed``.
    """
    if n_cycles < 1:
        raise ReboError("n_cycles must be at least 1")
    rng = np.random.default_rng(seed)
    trace = JuggleTrace()
    t, h = 0.0, h0
    z0 = spec.z_rest
    for cycle in range(n_cycles):
        trace.events.append(JuggleEvent(t, "apex", z0 + h, 0.0, "flight", cycle))
        trace.apex_sequence.append(h)
        v_in, t_fall = flight(h, spec)
        t += t_fall
        trace.events.append(JuggleEvent(t, "touchdown", z0 - spec.p_com, -v_in, "hit", cycle))
        b = ball
        if sigma_e > 0.0:
            e = float(np.clip(ball.restitution + sigma_e * rng.standard_normal(), 0.0, 1.0))
            b = replace(ball, restitution=e)
        res = hit(v_in, b, spec, method)
        if res.died:
            trace.events.append(JuggleEvent(t, "death", z0 - spec.p_com, 0.0, "hit", cycle))
            trace.died = True
            return trace
        t += res.t_hit
        trace.events.append(JuggleEvent(t, "liftoff", z0, res.v_out, "flight", cycle))
        t += res.v_out / G
        h = res.v_out ** 2 / (2.0 * G)
    trace.events.append(JuggleEvent(t, "apex", z0 + h, 0.0, "flight", n_cycles))
    trace.apex_sequence.append(h)
    return trace


def sample_path(ball: BallSpec, spec: JugglerSpec, h0: float, n_cycles: int,
                dt: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Ball height chi(t) sampled every ``dt`` over ``n_cycles`` bounces."""
    ts, xs = [], []
    t0, h = 0.0, h0
    z0 = spec.z_rest
    for _ in range(n_cycles):
        v_in, t_fall = flight(h, spec)
        tt = np.arange(0.0, t_fall, dt)
        ts.append(t0 + tt)
        xs.append(z0 + h - 0.5 * G * tt ** 2)
        t0 += t_fall
        stance = Stance(v_in, ball, spec)
        res = stance.liftoff()
        if res is None:
            break
        t_hit, v_out = res
        tt = np.arange(0.0, t_hit, dt)
        ts.append(t0 + tt)
        xs.append(z0 + np.array([stance.state(s)[0] for s in tt]))
        t0 += t_hit
        t_up = v_out / G
        tt = np.arange(0.0, t_up, dt)
        ts.append(t0 + tt)
        xs.append(z0 + v_out * tt - 0.5 * G * tt ** 2)
        t0 += t_up
        h = v_out ** 2 / (2.0 * G)
    return np.concatenate(ts), np.concatenate(xs)
