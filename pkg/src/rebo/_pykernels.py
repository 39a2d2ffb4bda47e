"""Pure-Python twins of the compiled kernels in ``_ckernels.pyx``.

Same signatures, same status codes. Used when the extension is not built
or when ``REBO_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np

LIFTOFF = 0
DEATH = 1
TIMEOUT = 2

_SQRT3 = math.sqrt(3.0)


def _step(x, v, h, k_m, b_m, g):
    k1x = v
    k1v = -k_m * x - b_m * v - g
    k2x = v + 0.5 * h * k1v
    k2v = -k_m * (x + 0.5 * h * k1x) - b_m * k2x - g
    k3x = v + 0.5 * h * k2v
    k3v = -k_m * (x + 0.5 * h * k2x) - b_m * k3x - g
    k4x = v + h * k3v
    k4v = -k_m * (x + h * k3x) - b_m * k4x - g
    return (x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))


def _propagator(h, k_m, b_m, g):
    # one RK4 step of a linear ODE is an affine map of (x, v); read it off the
    # classic stages once instead of re-evaluating them every step
    cx, cv = _step(0.0, 0.0, h, k_m, b_m, g)
    axx, avx = _step(1.0, 0.0, h, k_m, b_m, 0.0)
    axv, avv = _step(0.0, 1.0, h, k_m, b_m, 0.0)
    return axx, axv, avx, avv, cx, cv


def rk4_hit(x0, v0, k_m, b_m, g, dt, t_max):
    """Integrate x'' = -k_m x - b_m x' - g until the first upward crossing of x = 0.

    Returns ``(t, v, status)``; see ``_ckernels.rk4_hit``.
    """
    axx, axv, avx, avv, cx, cv = _propagator(dt, k_m, b_m, g)
    x, v, t = x0, v0, 0.0
    while t < t_max:
        xn = axx * x + axv * v + cx
        vn = avx * x + avv * v + cv
        if x < 0.0 and xn >= 0.0:
            lo, hi = 0.0, dt
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                xm, _vm = _step(x, v, mid, k_m, b_m, g)
                if xm < 0.0:
                    lo = mid
                else:
                    hi = mid
            xm, vm = _step(x, v, hi, k_m, b_m, g)
            if vm <= 0.0:
                return t + hi, vm, DEATH
            return t + hi, vm, LIFTOFF
        if v > 0.0 and vn <= 0.0 and xn < 0.0:
            return t + dt, vn, DEATH
        x, v = xn, vn
        t += dt
    return t, v, TIMEOUT


def jacobian_volume(l_lo, l_hi, d, n):
    """Midpoint tensor-grid integral of |det J| over [l_lo, l_hi]^3.

    Returns ``(volume, min_w)``; min_w <= 0 flags a grid node outside the
    spherical chart.
    """
    h = (l_hi - l_lo) / n
    if n <= 0 or h == 0.0:
        return 0.0, 1.0
    nodes = l_lo + (np.arange(n) + 0.5) * h
    l1, l2, l3 = np.meshgrid(nodes, nodes, nodes, indexing="ij")
    r = (l1 + l2 + l3) / 3.0
    c1 = (-2.0 * l1 + l2 + l3) / (6.0 * d)
    c2 = (l3 - l2) / (2.0 * _SQRT3 * d)
    w2 = 1.0 - c1 * c1 - c2 * c2
    if np.any(w2 <= 0.0):
        return 0.0, -1.0
    w = np.sqrt(w2)
    total = math.fsum((r * r / w).ravel())
    return total / (6.0 * _SQRT3 * d * d) * h ** 3, float(w.min())
