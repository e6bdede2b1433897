"""Pure-numpy implementations of the hot per-coordinate resolvent kernels.

Same contracts as the compiled module ``_speedups``; which one a process
uses is decided once, in ``monosum._kernels``.
"""

import numpy as np

BACKEND_NAME = "fallback"

_MAX_BISECT = 200

# smooth-graph kind codes shared with the compiled kernel
KIND_ODD_POLY = 0
KIND_SATURATING = 1


def _g_eval(kind, p0, p1, p2, u):
    if kind == KIND_ODD_POLY:
        return p0 * u + p1 * u**3 + p2 * u**5
    if kind == KIND_SATURATING:
        core = u * (3.0 - u * u) / 2.0
        return np.where(u > 1.0, 1.0, np.where(u < -1.0, -1.0, core))
    raise ValueError(f"unknown smooth kind {kind}")


def _g_deriv(kind, p0, p1, p2, u):
    if kind == KIND_ODD_POLY:
        return p0 + 3.0 * p1 * u**2 + 5.0 * p2 * u**4
    if kind == KIND_SATURATING:
        return np.where(np.abs(u) > 1.0, 0.0, 1.5 * (1.0 - u * u))
    raise ValueError(f"unknown smooth kind {kind}")


def smooth_resolvent_core(kind, p0, p1, p2, lam, w, tol):
    """Solve u + lam*g(u) = w coordinate-wise for a nondecreasing smooth g.

    Bisection on the strictly increasing map u -> u + lam*g(u), bracketed by
    [w - lam*g(w), w] (order swapped when g(w) < 0); monotonicity makes the
    bracket exact. Two Newton polish steps tighten the root to round-off.

    Returns (u, y, s) with y = g(u) and s = g'(u).
    """
    w = np.asarray(w, dtype=np.float64)
    gw = _g_eval(kind, p0, p1, p2, w)
    lo = np.where(gw >= 0.0, w - lam * gw, w)
    hi = np.where(gw >= 0.0, w, w - lam * gw)
    width_tol = tol * (1.0 + np.abs(w))
    for _ in range(_MAX_BISECT):
        if np.all(hi - lo <= width_tol):
            break
        mid = 0.5 * (lo + hi)
        r = mid + lam * _g_eval(kind, p0, p1, p2, mid) - w
        hi = np.where(r >= 0.0, mid, hi)
        lo = np.where(r >= 0.0, lo, mid)
    u = 0.5 * (lo + hi)
    for _ in range(2):
        r = u + lam * _g_eval(kind, p0, p1, p2, u) - w
        u = u - r / (1.0 + lam * _g_deriv(kind, p0, p1, p2, u))
    y = _g_eval(kind, p0, p1, p2, u)
    s = _g_deriv(kind, p0, p1, p2, u)
    return u, y, s


def pl_resolvent_core(bounds, seg_x, seg_y, seg_s, xs, lam, w):
    """Closed-form resolvent of a piecewise-linear monotone graph.

    ``bounds`` is the nondecreasing array of shifted breakpoint images
    [x_0 + lam*lo_0, x_0 + lam*hi_0, x_1 + lam*lo_1, ...]; an odd insertion
    index means w lands on a vertical segment, an even one on the linear
    piece with anchor (seg_x[k], seg_y[k]) and slope seg_s[k].

    Returns (u, y, s); s is +inf on vertical segments.
    """
    w = np.asarray(w, dtype=np.float64)
    idx = np.searchsorted(bounds, w, side="right")
    on_vertical = (idx % 2) == 1
    u = np.empty_like(w)
    y = np.empty_like(w)
    s = np.empty_like(w)

    k = (idx - 1) // 2
    kv = np.where(on_vertical, k, 0)
    u_v = xs[kv]
    np.copyto(u, u_v, where=on_vertical)
    np.copyto(y, (w - u_v) / lam, where=on_vertical)
    np.copyto(s, np.inf, where=on_vertical)

    ks = np.where(on_vertical, 0, idx // 2)
    ax, ay, sl = seg_x[ks], seg_y[ks], seg_s[ks]
    u_s = (w - lam * (ay - sl * ax)) / (1.0 + lam * sl)
    np.copyto(u, u_s, where=~on_vertical)
    np.copyto(y, ay + sl * (u_s - ax), where=~on_vertical)
    np.copyto(s, sl, where=~on_vertical)
    return u, y, s
