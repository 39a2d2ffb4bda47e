# cython: language_level=3
"""Compiled hot loops: stance-phase RK4 integration and Jacobian quadrature.

Semantics must match ``rebo._pykernels`` exactly; tests compare the two.
"""
from libc.math cimport sqrt, fabs

cdef double SQRT3 = 1.7320508075688772

cdef enum:
    LIFTOFF = 0
    DEATH = 1
    TIMEOUT = 2


cdef inline void _step(double x, double v, double h, double k_m, double b_m,
                       double g, double* xo, double* vo) nogil:
    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v
    k1x = v
    k1v = -k_m * x - b_m * v - g
    k2x = v + 0.5 * h * k1v
    k2v = -k_m * (x + 0.5 * h * k1x) - b_m * k2x - g
    k3x = v + 0.5 * h * k2v
    k3v = -k_m * (x + 0.5 * h * k2x) - b_m * k3x - g
    k4x = v + h * k3v
    k4v = -k_m * (x + h * k3x) - b_m * k4x - g
    xo[0] = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    vo[0] = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)


cdef int _integrate(double x, double v, double k_m, double b_m, double g,
                    double dt, double t_max, double* t_out, double* v_out) nogil:
    cdef double t = 0.0, xn, vn, lo, hi, mid, xm, vm
    cdef int it
    while t < t_max:
        _step(x, v, dt, k_m, b_m, g, &xn, &vn)
        if x < 0.0 and xn >= 0.0:
            lo = 0.0
            hi = dt
            for it in range(200):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                _step(x, v, mid, k_m, b_m, g, &xm, &vm)
                if xm < 0.0:
                    lo = mid
                else:
                    hi = mid
            _step(x, v, hi, k_m, b_m, g, &xm, &vm)
            t_out[0] = t + hi
            v_out[0] = vm
            if vm <= 0.0:
                return DEATH
            return LIFTOFF
        if v > 0.0 and vn <= 0.0 and xn < 0.0:
            t_out[0] = t + dt
            v_out[0] = vn
            return DEATH
        x = xn
        v = vn
        t += dt
    t_out[0] = t
    v_out[0] = v
    return TIMEOUT


def rk4_hit(double x0, double v0, double k_m, double b_m, double g,
            double dt, double t_max):
    """Integrate x'' = -k_m x - b_m x' - g until the first upward crossing of x = 0.

    Returns ``(t, v, status)`` with status 0 (liftoff), 1 (death: a velocity
    maximum below x = 0) or 2 (t_max exceeded).
    """
    cdef double t, v
    cdef int status
    with nogil:
        status = _integrate(x0, v0, k_m, b_m, g, dt, t_max, &t, &v)
    return t, v, status


def jacobian_volume(double l_lo, double l_hi, double d, long n):
    """Midpoint tensor-grid integral of |det J| over [l_lo, l_hi]^3.

    Neumaier-compensated accumulation. Returns ``(volume, min_w)`` where
    min_w is the smallest z/r encountered; min_w <= 0 means the grid left
    the spherical chart and the volume is meaningless.
    """
    cdef double h = (l_hi - l_lo) / n if n > 0 else 0.0
    cdef double scale = 1.0 / (6.0 * SQRT3 * d * d)
    cdef double s = 0.0, c = 0.0, term, tmp
    cdef double l1, l2, l3, r, c1, c2, w2, w, min_w = 1.0
    cdef long i, j, k
    cdef bint outside = False
    if n <= 0 or h == 0.0:
        return 0.0, 1.0
    with nogil:
        for i in range(n):
            l1 = l_lo + (i + 0.5) * h
            for j in range(n):
                l2 = l_lo + (j + 0.5) * h
                for k in range(n):
                    l3 = l_lo + (k + 0.5) * h
                    r = (l1 + l2 + l3) / 3.0
                    c1 = (-2.0 * l1 + l2 + l3) / (6.0 * d)
                    c2 = (l3 - l2) / (2.0 * SQRT3 * d)
                    w2 = 1.0 - c1 * c1 - c2 * c2
                    if w2 <= 0.0:
                        outside = True
                        continue
                    w = sqrt(w2)
                    if w < min_w:
                        min_w = w
                    term = r * r / w
                    tmp = s + term
                    if fabs(s) >= fabs(term):
                        c += (s - tmp) + term
                    else:
                        c += (term - tmp) + s
                    s = tmp
    if outside:
        return 0.0, -1.0
    return (s + c) * scale * h * h * h, min_w
