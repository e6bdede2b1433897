"""Convex functions with explicit subdifferential structure.

A ConvexFunctionSpec pairs an evaluation rule (values in R union {+inf},
encoded as ``math.inf``, never by large finite sentinels) with a proximal
rule. Closed forms come for free when the subgradient is a scalar graph:
the graph resolvent *is* the prox, computed exactly for piecewise-linear
graphs and by guarded bisection for smooth ones. Quadratic functions carry
their matrix and delegate to conjugate gradients.
"""

import math

import numpy as np

from monosum.errors import ConfigurationError, NonConvergenceError
from monosum.graphs import (
    IntervalNormalConeGraph,
    PiecewiseLinearGraph,
    PolyGraph,
    ScalarMonotoneGraph,
    SumGraph,
)
from monosum.linalg import SymSparseMatrix, _cg_matvec, as_vector


class ConvexFunctionSpec:
    """Proper convex function with value and prox access.

    Exactly one structural backend is set: a scalar subgradient ``graph``
    (applied coordinate-wise) or a symmetric PSD ``matrix`` for the
    quadratic (1/2)<Mx, x>.
    """

    def __init__(self, label, value_fn, graph=None, matrix=None):
        if (graph is None) == (matrix is None):
            raise ConfigurationError("need exactly one of graph / matrix")
        self.label = label
        self._value_fn = value_fn
        self.graph: ScalarMonotoneGraph | None = graph
        self.matrix: SymSparseMatrix | None = matrix

    @property
    def separable(self) -> bool:
        return self.graph is not None

    def domain(self) -> tuple[float, float]:
        """Per-coordinate effective domain (whole line for quadratics)."""
        return self.graph.domain() if self.graph is not None else (-math.inf, math.inf)

    def value(self, x) -> float:
        return float(self._value_fn(as_vector(x)))

    def prox(self, lam: float, w, tol: float = 1e-12) -> np.ndarray:
        """argmin_v lam*f(v) + 0.5*||v - w||^2."""
        w = as_vector(w)
        if lam <= 0:
            raise ConfigurationError("prox parameter must be positive")
        if self.graph is not None:
            u, _, _ = self.graph.resolve(lam, w, tol)
            return u
        matvec = lambda v: v + lam * self.matrix.matvec(v)
        x, relres, ok = _cg_matvec(matvec, w, tol, 10 * self.matrix.n)
        if not ok:
            raise NonConvergenceError(
                f"prox solve for '{self.label}' stalled at relative residual {relres:.3e}",
                best=x,
                residual=relres,
            )
        return x

    def scaled(self, c: float) -> "ConvexFunctionSpec":
        if c <= 0:
            raise ConfigurationError("convex scaling factor must be positive")
        if self.graph is not None:
            return ConvexFunctionSpec(
                f"{c}*{self.label}",
                lambda x, _f=self._value_fn: c * _f(x),
                graph=self.graph.scaled(c),
            )
        return ConvexFunctionSpec(
            f"{c}*{self.label}",
            lambda x, _f=self._value_fn: c * _f(x),
            matrix=self.matrix.scaled(c),
        )

    def add(self, other: "ConvexFunctionSpec") -> "ConvexFunctionSpec":
        label = f"{self.label}+{other.label}"
        f1, f2 = self._value_fn, other._value_fn
        value_fn = lambda x: f1(x) + f2(x)
        if self.graph is not None and other.graph is not None:
            return ConvexFunctionSpec(label, value_fn, graph=SumGraph(self.graph, other.graph))
        if self.matrix is not None and other.matrix is not None:
            merged = SymSparseMatrix(
                self.matrix.n,
                np.concatenate([self.matrix.rows, other.matrix.rows]),
                np.concatenate([self.matrix.cols, other.matrix.cols]),
                np.concatenate([self.matrix.vals, other.matrix.vals]),
                psd=self.matrix.psd and other.matrix.psd,
            )
            return ConvexFunctionSpec(label, value_fn, matrix=merged)
        raise ConfigurationError("mixed quadratic/separable sums have no prox rule here")


def _indicator_value(x, a, b):
    return 0.0 if np.all(x >= a) and np.all(x <= b) else math.inf


def abs_function() -> ConvexFunctionSpec:
    sign = PiecewiseLinearGraph([(0.0, -1.0, 1.0)], left_slope=0.0, right_slope=0.0)
    return ConvexFunctionSpec("abs", lambda x: float(np.sum(np.abs(x))), graph=sign)


def half_square() -> ConvexFunctionSpec:
    return ConvexFunctionSpec(
        "half_square", lambda x: 0.5 * float(np.dot(x, x)), graph=PolyGraph(1.0)
    )


def power4() -> ConvexFunctionSpec:
    return ConvexFunctionSpec(
        "power4", lambda x: float(np.sum(x**4)), graph=PolyGraph(0.0, 4.0)
    )


def indicator_nonneg() -> ConvexFunctionSpec:
    return ConvexFunctionSpec(
        "indicator_nonneg",
        lambda x: _indicator_value(x, 0.0, math.inf),
        graph=IntervalNormalConeGraph(0.0, math.inf),
    )


def indicator_box(a: float, b: float) -> ConvexFunctionSpec:
    return ConvexFunctionSpec(
        f"indicator_box[{a},{b}]",
        lambda x: _indicator_value(x, a, b),
        graph=IntervalNormalConeGraph(a, b),
    )


def quadratic(matrix: SymSparseMatrix) -> ConvexFunctionSpec:
    if not matrix.psd:
        raise ConfigurationError("quadratic convex functions need a PSD matrix")
    return ConvexFunctionSpec(
        "quadratic", lambda x: 0.5 * float(np.dot(x, matrix.matvec(x))), matrix=matrix
    )


PRESETS = {
    "abs": abs_function,
    "half_square": half_square,
    "power4": power4,
    "indicator_nonneg": indicator_nonneg,
}


def preset(name: str, **params) -> ConvexFunctionSpec:
    if name == "indicator_box":
        return indicator_box(params.get("a", 0.0), params.get("b", 1.0))
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigurationError(f"unknown convex preset '{name}'") from None


def convex_pairs() -> list[tuple[str, ConvexFunctionSpec, ConvexFunctionSpec]]:
    """The bundled (phi, psi) pairs whose summed prox has a known closed form.

    Used by the variational-sum cross-checks; the closed forms themselves
    live with the tests that consume them. All subgradient breakpoints sit
    at the origin, where vertical-segment difference quotients stay exact
    for arbitrarily small regularization parameters.
    """
    return [
        ("half_square+indicator_nonneg", half_square(), indicator_nonneg()),
        ("abs+half_square", abs_function(), half_square()),
        ("abs+indicator_nonneg", abs_function(), indicator_nonneg()),
        ("power4+half_square", power4(), half_square()),
        ("abs+power4", abs_function(), power4()),
    ]
