"""Scalar monotone graphs: possibly multivalued nondecreasing relations on R.

Three concrete representations (smooth functions with derivative access,
piecewise-linear graphs with vertical segments, normal cones of intervals)
plus positive scaling and pointwise sums, which keep the class closed under
the operations the operator layer needs.

``resolve(lam, w)`` solves w in u + lam*g(u) coordinate-wise and returns
``(u, y, s)``: the resolvent u, the active graph value y (the element of
g(u) certifying the inclusion), and the active slope s (+inf on vertical
segments). Slopes feed the generalized Jacobians of the Newton flows.
"""

import numpy as np

from monosum import _kernels
from monosum.errors import ConfigurationError, DomainError
from monosum.linalg import as_vector

BISECT_TOL = 1e-12
_MAX_EXPAND = 200


class ScalarMonotoneGraph:
    """Base class; concrete graphs implement the evaluation primitives."""

    multivalued = False
    smooth = False

    def resolve(self, lam: float, w: np.ndarray, tol: float = BISECT_TOL):
        raise NotImplementedError

    def value_bounds(self, x: np.ndarray):
        """Vectorized (lower, upper) selections of g(x); +-inf allowed."""
        raise NotImplementedError

    def slope_at(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def domain(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def scaled(self, c: float) -> "ScalarMonotoneGraph":
        if c <= 0:
            raise ConfigurationError("graph scaling factor must be positive")
        return ScaledGraph(self, c)

    # -- conveniences -----------------------------------------------------

    def value_interval(self, x: float) -> tuple[float, float]:
        lo, hi = self.value_bounds(np.asarray([float(x)]))
        return float(lo[0]), float(hi[0])

    def minimal_section(self, x: float) -> float:
        """min{|y| : y in g(x)}; DomainError outside the effective domain."""
        dlo, dhi = self.domain()
        if not (dlo <= x <= dhi):
            raise DomainError(f"{x} outside graph domain [{dlo}, {dhi}]")
        lo, hi = self.value_interval(x)
        if lo <= 0.0 <= hi:
            return 0.0
        return min(abs(lo), abs(hi))

    def contains_zero_at_zero(self) -> bool:
        dlo, dhi = self.domain()
        if not (dlo <= 0.0 <= dhi):
            return False
        lo, hi = self.value_interval(0.0)
        return lo <= 0.0 <= hi


def _check_normalized(graph: ScalarMonotoneGraph) -> None:
    if not graph.contains_zero_at_zero():
        raise ConfigurationError("graph declared normalized but 0 is not in g(0)")


class PolyGraph(ScalarMonotoneGraph):
    """g(u) = c1*u + c3*u^3 + c5*u^5 with nonnegative coefficients."""

    smooth = True

    def __init__(self, c1: float = 0.0, c3: float = 0.0, c5: float = 0.0):
        if min(c1, c3, c5) < 0:
            raise ConfigurationError("odd-polynomial graph needs nonnegative coefficients")
        self.c1, self.c3, self.c5 = float(c1), float(c3), float(c5)

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        return self.c1 * u + self.c3 * u**3 + self.c5 * u**5

    def derivative(self, u):
        u = np.asarray(u, dtype=np.float64)
        return self.c1 + 3.0 * self.c3 * u**2 + 5.0 * self.c5 * u**4

    def resolve(self, lam, w, tol=BISECT_TOL):
        return _kernels.smooth_resolvent_core(
            _kernels.KIND_ODD_POLY, self.c1, self.c3, self.c5, lam, as_vector(w), tol
        )

    def value_bounds(self, x):
        y = self(x)
        return y, y.copy()

    def slope_at(self, x):
        return self.derivative(x)

    def scaled(self, c):
        if c <= 0:
            raise ConfigurationError("graph scaling factor must be positive")
        return PolyGraph(c * self.c1, c * self.c3, c * self.c5)


class SaturatingGraph(ScalarMonotoneGraph):
    """C^1 saturating nonlinearity: cubic ramp-up on [-1, 1], flat outside."""

    smooth = True

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.where(u > 1.0, 1.0, np.where(u < -1.0, -1.0, u * (3.0 - u * u) / 2.0))

    def derivative(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.where(np.abs(u) > 1.0, 0.0, 1.5 * (1.0 - u * u))

    def resolve(self, lam, w, tol=BISECT_TOL):
        return _kernels.smooth_resolvent_core(
            _kernels.KIND_SATURATING, 0.0, 0.0, 0.0, lam, as_vector(w), tol
        )

    def value_bounds(self, x):
        y = self(x)
        return y, y.copy()

    def slope_at(self, x):
        return self.derivative(x)


class SmoothCallableGraph(ScalarMonotoneGraph):
    """Generic smooth nondecreasing function given by callables.

    Used for one-off graphs; always served by the vectorized-bisection path
    (the compiled kernel only covers the structured presets).
    """

    smooth = True

    def __init__(self, fn, deriv, label: str = "smooth"):
        self.fn = fn
        self.deriv = deriv
        self.label = label
        probe = np.linspace(-10.0, 10.0, 201)
        vals = np.asarray(fn(probe), dtype=np.float64)
        if np.any(np.diff(vals) < -1e-12):
            raise ConfigurationError(f"graph '{label}' is not nondecreasing on a coarse probe")

    def __call__(self, u):
        return np.asarray(self.fn(np.asarray(u, dtype=np.float64)), dtype=np.float64)

    def derivative(self, u):
        return np.asarray(self.deriv(np.asarray(u, dtype=np.float64)), dtype=np.float64)

    def resolve(self, lam, w, tol=BISECT_TOL):
        w = as_vector(w)
        gw = self(w)
        lo = np.where(gw >= 0.0, w - lam * gw, w)
        hi = np.where(gw >= 0.0, w, w - lam * gw)
        width_tol = tol * (1.0 + np.abs(w))
        for _ in range(200):
            if np.all(hi - lo <= width_tol):
                break
            mid = 0.5 * (lo + hi)
            r = mid + lam * self(mid) - w
            hi = np.where(r >= 0.0, mid, hi)
            lo = np.where(r >= 0.0, lo, mid)
        u = 0.5 * (lo + hi)
        for _ in range(2):
            r = u + lam * self(u) - w
            u = u - r / (1.0 + lam * self.derivative(u))
        return u, self(u), self.derivative(u)

    def value_bounds(self, x):
        y = self(x)
        return y, y.copy()

    def slope_at(self, x):
        return self.derivative(x)


class PiecewiseLinearGraph(ScalarMonotoneGraph):
    """Monotone piecewise-linear graph with optional vertical segments.

    ``breakpoints`` is a list of (x, y_lo, y_hi) with strictly increasing x
    and y_lo <= y_hi; between breakpoints the graph interpolates linearly
    from the upper value of the left breakpoint to the lower value of the
    right one, and the two tails extend with the given slopes.
    """

    def __init__(self, breakpoints, left_slope: float = 0.0, right_slope: float = 0.0):
        pts = [(float(x), float(lo), float(hi)) for x, lo, hi in breakpoints]
        if not pts:
            raise ConfigurationError("piecewise-linear graph needs at least one breakpoint")
        xs = np.asarray([p[0] for p in pts])
        lo = np.asarray([p[1] for p in pts])
        hi = np.asarray([p[2] for p in pts])
        if np.any(np.diff(xs) <= 0):
            raise ConfigurationError("breakpoint abscissae must be strictly increasing")
        if np.any(lo > hi):
            raise ConfigurationError("vertical-segment intervals must satisfy y_lo <= y_hi")
        if left_slope < 0 or right_slope < 0:
            raise ConfigurationError("tail slopes must be nonnegative")
        if len(xs) > 1 and np.any(hi[:-1] > lo[1:]):
            raise ConfigurationError("breakpoint values must be nondecreasing across segments")
        self.xs, self.lo, self.hi = xs, lo, hi
        self.left_slope, self.right_slope = float(left_slope), float(right_slope)
        m = len(xs)
        # segment k covers (boundary of breakpoint k-1, breakpoint k)
        seg_x = np.empty(m + 1)
        seg_y = np.empty(m + 1)
        seg_s = np.empty(m + 1)
        seg_x[0], seg_y[0], seg_s[0] = xs[0], lo[0], self.left_slope
        if m > 1:
            seg_x[1:m] = xs[:-1]
            seg_y[1:m] = hi[:-1]
            with np.errstate(over="ignore"):
                seg_s[1:m] = (lo[1:] - hi[:-1]) / (xs[1:] - xs[:-1])
            if not np.all(np.isfinite(seg_s[1:m])):
                raise ConfigurationError(
                    "breakpoints too close: interior segment slope overflows"
                )
        seg_x[m], seg_y[m], seg_s[m] = xs[-1], hi[-1], self.right_slope
        self._seg_x, self._seg_y, self._seg_s = seg_x, seg_y, seg_s
        self.multivalued = bool(np.any(hi > lo))

    def resolve(self, lam, w, tol=BISECT_TOL):
        bounds = np.empty(2 * len(self.xs))
        bounds[0::2] = self.xs + lam * self.lo
        bounds[1::2] = self.xs + lam * self.hi
        return _kernels.pl_resolvent_core(
            bounds, self._seg_x, self._seg_y, self._seg_s, self.xs, lam, as_vector(w)
        )

    def value_bounds(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self.xs, x, side="left")
        on_bp = (idx < len(self.xs)) & (self.xs[np.minimum(idx, len(self.xs) - 1)] == x)
        seg = np.where(on_bp, 0, idx)
        ax, ay, sl = self._seg_x[seg], self._seg_y[seg], self._seg_s[seg]
        line = ay + sl * (x - ax)
        k = np.minimum(idx, len(self.xs) - 1)
        lo = np.where(on_bp, self.lo[k], line)
        hi = np.where(on_bp, self.hi[k], line)
        return lo, hi

    def slope_at(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self.xs, x, side="left")
        k = np.minimum(idx, len(self.xs) - 1)
        on_vertical = (idx < len(self.xs)) & (self.xs[k] == x) & (self.hi[k] > self.lo[k])
        seg = np.where((idx < len(self.xs)) & (self.xs[k] == x) & ~on_vertical, idx + 1, idx)
        # at a single-valued breakpoint the right segment's slope is as good
        # a generalized derivative as the left one
        seg = np.minimum(seg, len(self._seg_s) - 1)
        return np.where(on_vertical, np.inf, self._seg_s[seg])

    def scaled(self, c):
        if c <= 0:
            raise ConfigurationError("graph scaling factor must be positive")
        pts = [(x, c * lo, c * hi) for x, lo, hi in zip(self.xs, self.lo, self.hi)]
        return PiecewiseLinearGraph(pts, c * self.left_slope, c * self.right_slope)


class IntervalNormalConeGraph(ScalarMonotoneGraph):
    """Normal cone of the interval [a, b] (either end may be infinite)."""

    multivalued = True

    def __init__(self, a: float, b: float):
        if not a <= b:
            raise ConfigurationError("interval endpoints must satisfy a <= b")
        self.a, self.b = float(a), float(b)

    def domain(self):
        return (self.a, self.b)

    def resolve(self, lam, w, tol=BISECT_TOL):
        w = as_vector(w)
        u = np.clip(w, self.a, self.b)
        y = (w - u) / lam
        inside = (w > self.a) & (w < self.b)
        s = np.where(inside, 0.0, np.inf)
        return u, y, s

    def value_bounds(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < self.a) or np.any(x > self.b):
            raise DomainError("point outside the interval domain")
        lo = np.where(x == self.a, -np.inf, 0.0)
        hi = np.where(x == self.b, np.inf, 0.0)
        return lo, hi

    def slope_at(self, x):
        x = np.asarray(x, dtype=np.float64)
        inside = (x > self.a) & (x < self.b)
        return np.where(inside, 0.0, np.inf)

    def scaled(self, c):
        if c <= 0:
            raise ConfigurationError("graph scaling factor must be positive")
        return self  # positive scaling leaves a cone of normals unchanged


class ScaledGraph(ScalarMonotoneGraph):
    """c * g for c > 0, delegating to the wrapped graph at parameter c*lam."""

    def __init__(self, inner: ScalarMonotoneGraph, c: float):
        if c <= 0:
            raise ConfigurationError("graph scaling factor must be positive")
        self.inner = inner
        self.c = float(c)
        self.multivalued = inner.multivalued
        self.smooth = inner.smooth

    def resolve(self, lam, w, tol=BISECT_TOL):
        u, y, s = self.inner.resolve(lam * self.c, w, tol)
        return u, self.c * y, self.c * s

    def value_bounds(self, x):
        lo, hi = self.inner.value_bounds(x)
        return self.c * lo, self.c * hi

    def slope_at(self, x):
        return self.c * self.inner.slope_at(x)

    def domain(self):
        return self.inner.domain()


class SumGraph(ScalarMonotoneGraph):
    """Pointwise sum of two monotone graphs on the intersected domain.

    The resolvent solves w in u + lam*(g1(u) + g2(u)) by interval bisection:
    the map is strictly increasing but may jump, so the iteration brackets
    the unique u whose value interval straddles the target.
    """

    def __init__(self, g1: ScalarMonotoneGraph, g2: ScalarMonotoneGraph):
        self.g1, self.g2 = g1, g2
        dlo = max(g1.domain()[0], g2.domain()[0])
        dhi = min(g1.domain()[1], g2.domain()[1])
        if dlo > dhi:
            raise ConfigurationError("summed graphs have disjoint domains")
        self._dom = (dlo, dhi)
        self.multivalued = g1.multivalued or g2.multivalued
        self.smooth = g1.smooth and g2.smooth

    def domain(self):
        return self._dom

    def value_bounds(self, x):
        lo1, hi1 = self.g1.value_bounds(x)
        lo2, hi2 = self.g2.value_bounds(x)
        return lo1 + lo2, hi1 + hi2

    def slope_at(self, x):
        return self.g1.slope_at(x) + self.g2.slope_at(x)

    def _f_bounds(self, u, lam, w):
        lo, hi = self.value_bounds(u)
        return u + lam * lo - w, u + lam * hi - w

    def resolve(self, lam, w, tol=BISECT_TOL):
        w = as_vector(w)
        dlo, dhi = self._dom
        if dlo == dhi:
            u = np.full_like(w, dlo)
            return u, (w - u) / lam, np.full_like(w, np.inf)
        # initial bracket, clamped into the domain and expanded geometrically
        # on the unbounded sides until it straddles the target
        span = 1.0 + np.abs(w)
        a = np.clip(w - span, dlo, dhi)
        b = np.clip(w + span, dlo, dhi)
        for _ in range(_MAX_EXPAND):
            f_lo_a, _ = self._f_bounds(a, lam, w)
            need = (f_lo_a > 0.0) & (a > dlo)
            if not np.any(need):
                break
            a = np.where(need, np.clip(a - (b - a) - span, dlo, dhi), a)
        for _ in range(_MAX_EXPAND):
            _, f_hi_b = self._f_bounds(b, lam, w)
            need = (f_hi_b < 0.0) & (b < dhi)
            if not np.any(need):
                break
            b = np.where(need, np.clip(b + (b - a) + span, dlo, dhi), b)
        f_lo_a, _ = self._f_bounds(a, lam, w)
        _, f_hi_b = self._f_bounds(b, lam, w)
        if np.any((f_lo_a > 0.0) & (a > dlo)) or np.any((f_hi_b < 0.0) & (b < dhi)):
            raise DomainError("could not bracket the sum-graph resolvent inclusion")
        width_tol = tol * (1.0 + np.abs(w))
        for _ in range(200):
            if np.all(b - a <= width_tol):
                break
            mid = 0.5 * (a + b)
            f_lo, f_hi = self._f_bounds(mid, lam, w)
            go_right = f_hi < 0.0
            go_left = f_lo > 0.0
            a = np.where(go_right, mid, a)
            b = np.where(go_left, mid, b)
            hit = ~(go_right | go_left)  # value interval straddles zero
            a = np.where(hit, mid, a)
            b = np.where(hit, mid, b)
        u = 0.5 * (a + b)
        return u, (w - u) / lam, self.slope_at(u)
