# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-coordinate resolvent kernels.

Mirrors ``fallback.py`` exactly: same bracketing, same iteration counts,
same polish steps, so the two backends agree to round-off.
"""

import numpy as np

from libc.math cimport fabs, INFINITY

BACKEND_NAME = "compiled"

DEF MAX_BISECT = 200

KIND_ODD_POLY = 0
KIND_SATURATING = 1


cdef inline double _g(int kind, double p0, double p1, double p2, double u) noexcept nogil:
    cdef double u2
    if kind == 0:
        u2 = u * u
        return u * (p0 + u2 * (p1 + u2 * p2))
    # saturating spline
    if u > 1.0:
        return 1.0
    if u < -1.0:
        return -1.0
    return u * (3.0 - u * u) / 2.0


cdef inline double _gp(int kind, double p0, double p1, double p2, double u) noexcept nogil:
    cdef double u2
    if kind == 0:
        u2 = u * u
        return p0 + u2 * (3.0 * p1 + 5.0 * p2 * u2)
    if u > 1.0 or u < -1.0:
        return 0.0
    return 1.5 * (1.0 - u * u)


def smooth_resolvent_core(int kind, double p0, double p1, double p2,
                          double lam, w, double tol):
    w_arr = np.ascontiguousarray(w, dtype=np.float64)
    n = w_arr.shape[0]
    u_arr = np.empty(n, dtype=np.float64)
    y_arr = np.empty(n, dtype=np.float64)
    s_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] wv = w_arr
    cdef double[::1] uv = u_arr
    cdef double[::1] yv = y_arr
    cdef double[::1] sv = s_arr
    cdef Py_ssize_t i, it, np_
    cdef double wi, gw, lo, hi, mid, r, u, width_tol
    cdef Py_ssize_t nn = n
    with nogil:
        for i in range(nn):
            wi = wv[i]
            gw = _g(kind, p0, p1, p2, wi)
            if gw >= 0.0:
                lo = wi - lam * gw
                hi = wi
            else:
                lo = wi
                hi = wi - lam * gw
            width_tol = tol * (1.0 + fabs(wi))
            for it in range(MAX_BISECT):
                if hi - lo <= width_tol:
                    break
                mid = 0.5 * (lo + hi)
                r = mid + lam * _g(kind, p0, p1, p2, mid) - wi
                if r >= 0.0:
                    hi = mid
                else:
                    lo = mid
            u = 0.5 * (lo + hi)
            for np_ in range(2):
                r = u + lam * _g(kind, p0, p1, p2, u) - wi
                u = u - r / (1.0 + lam * _gp(kind, p0, p1, p2, u))
            uv[i] = u
            yv[i] = _g(kind, p0, p1, p2, u)
            sv[i] = _gp(kind, p0, p1, p2, u)
    return u_arr, y_arr, s_arr


def pl_resolvent_core(bounds, seg_x, seg_y, seg_s, xs, double lam, w):
    b_arr = np.ascontiguousarray(bounds, dtype=np.float64)
    ax_arr = np.ascontiguousarray(seg_x, dtype=np.float64)
    ay_arr = np.ascontiguousarray(seg_y, dtype=np.float64)
    sl_arr = np.ascontiguousarray(seg_s, dtype=np.float64)
    xs_arr = np.ascontiguousarray(xs, dtype=np.float64)
    w_arr = np.ascontiguousarray(w, dtype=np.float64)
    n = w_arr.shape[0]
    u_arr = np.empty(n, dtype=np.float64)
    y_arr = np.empty(n, dtype=np.float64)
    s_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] bv = b_arr
    cdef double[::1] axv = ax_arr
    cdef double[::1] ayv = ay_arr
    cdef double[::1] slv = sl_arr
    cdef double[::1] xv = xs_arr
    cdef double[::1] wv = w_arr
    cdef double[::1] uv = u_arr
    cdef double[::1] yv = y_arr
    cdef double[::1] sv = s_arr
    cdef Py_ssize_t i, lo_i, hi_i, mid_i, idx, k
    cdef Py_ssize_t nn = n
    cdef Py_ssize_t nb = bv.shape[0]
    cdef double wi, u, sl
    with nogil:
        for i in range(nn):
            wi = wv[i]
            # bisect_right over the shifted breakpoint images
            lo_i = 0
            hi_i = nb
            while lo_i < hi_i:
                mid_i = (lo_i + hi_i) >> 1
                if wi < bv[mid_i]:
                    hi_i = mid_i
                else:
                    lo_i = mid_i + 1
            idx = lo_i
            if idx & 1:
                k = (idx - 1) >> 1
                u = xv[k]
                uv[i] = u
                yv[i] = (wi - u) / lam
                sv[i] = INFINITY
            else:
                k = idx >> 1
                sl = slv[k]
                u = (wi - lam * (ayv[k] - sl * axv[k])) / (1.0 + lam * sl)
                uv[i] = u
                yv[i] = ayv[k] + sl * (u - axv[k])
                sv[i] = sl
    return u_arr, y_arr, s_arr
