"""Operator specifications and the resolvent / Yosida / Moreau surface.

Every spec evaluates its resolvent J_lam = (I + lam*T)^(-1) for all lam > 0;
the Yosida approximation T_lam = (I - J_lam)/lam is always computed in graph
form (T applied to the resolvent) where T is single-valued there, which
stays accurate for arbitrarily small lam where the difference quotient
would cancel catastrophically. Only genuinely multivalued points fall back
to the quotient.

Operators carry a ``weight`` (volume element of the underlying mesh) so the
diagnostics can form inner products that approximate integrals.
"""

import numpy as np

from monosum.convex import ConvexFunctionSpec
from monosum.errors import CapabilityError, ConfigurationError, NonConvergenceError
from monosum.graphs import ScalarMonotoneGraph
from monosum.linalg import SymSparseMatrix, _cg_matvec, as_vector

RESOLVENT_TOL = 1e-11
# Yosida evaluations push the inner solves to their round-off floor instead
# of failing: the values feed Newton residuals whose tolerances account for
# the achievable accuracy.
_YOSIDA_SOLVE_TOL = 1e-14


class OperatorSpec:
    """Maximal monotone operator with resolvent access.

    ``yosida_pair`` returns the Yosida value together with a Jacobian-vector
    product of the (a.e. differentiable) Yosida map, which is what the
    regularized-equation Newton solves consume. ``action_pair`` is the
    unregularized counterpart, available when the operator is single-valued.
    """

    dimension: int | None = None
    linear: bool = False
    selfadjoint: bool = False
    weight: float = 1.0
    label: str = "operator"

    def resolvent(self, lam: float, w: np.ndarray, tol: float = RESOLVENT_TOL) -> np.ndarray:
        raise NotImplementedError

    def yosida_pair(self, lam: float, w: np.ndarray, tol: float = RESOLVENT_TOL):
        raise NotImplementedError

    def yosida(self, lam: float, w, tol: float = RESOLVENT_TOL) -> np.ndarray:
        value, _ = self.yosida_pair(lam, as_vector(w), tol)
        return value

    @property
    def has_action(self) -> bool:
        return False

    def action_pair(self, u: np.ndarray):
        raise CapabilityError(f"{self.label} has no single-valued action")

    def action(self, u) -> np.ndarray:
        value, _ = self.action_pair(as_vector(u))
        return value

    def scaled(self, c: float) -> "OperatorSpec":
        raise NotImplementedError

    def check_vector(self, w) -> np.ndarray:
        w = as_vector(w)
        if self.dimension is not None and len(w) != self.dimension:
            raise ConfigurationError(
                f"vector length {len(w)} does not match operator dimension {self.dimension}"
            )
        return w


class LinearOperator(OperatorSpec):
    """Monotone linear operator given by a symmetric PSD sparse matrix."""

    linear = True
    selfadjoint = True

    def __init__(self, matrix: SymSparseMatrix, weight: float = 1.0, label: str = "linear"):
        if not matrix.psd:
            raise ConfigurationError("linear operator specs require a PSD matrix")
        self.matrix = matrix
        self.dimension = matrix.n
        self.weight = float(weight)
        self.label = label

    def _solve(self, lam, b, tol, lenient=False):
        matvec = lambda v: v + lam * self.matrix.matvec(v)
        x, relres, ok = _cg_matvec(
            matvec, b, tol, 10 * self.matrix.n, stall_limit=40 if lenient else None
        )
        if not ok and not lenient:
            raise NonConvergenceError(
                f"resolvent solve for {self.label} stalled at {relres:.3e}",
                best=x,
                residual=relres,
            )
        return x

    def resolvent(self, lam, w, tol=RESOLVENT_TOL):
        w = self.check_vector(w)
        return self._solve(lam, w, tol)

    def yosida_pair(self, lam, w, tol=RESOLVENT_TOL):
        solve_tol = min(tol, _YOSIDA_SOLVE_TOL)
        value = self.matrix.matvec(self._solve(lam, self.check_vector(w), solve_tol, lenient=True))
        jvp = lambda x: self.matrix.matvec(self._solve(lam, x, solve_tol, lenient=True))
        return value, jvp

    @property
    def has_action(self) -> bool:
        return True

    def action_pair(self, u):
        return self.matrix.matvec(u), self.matrix.matvec

    def scaled(self, c):
        return LinearOperator(self.matrix.scaled(c), self.weight, self.label)


class SeparableOperator(OperatorSpec):
    """Scalar monotone graph applied coordinate-wise."""

    def __init__(
        self,
        graph: ScalarMonotoneGraph,
        dimension: int | None = None,
        weight: float = 1.0,
        label: str = "separable",
    ):
        self.graph = graph
        self.dimension = dimension
        self.weight = float(weight)
        self.label = label

    def resolvent(self, lam, w, tol=RESOLVENT_TOL):
        u, _, _ = self.graph.resolve(lam, self.check_vector(w), tol)
        return u

    def yosida_pair(self, lam, w, tol=RESOLVENT_TOL):
        _, y, s = self.graph.resolve(lam, self.check_vector(w), tol)
        vertical = np.isinf(s)
        s_fin = np.where(vertical, 0.0, s)
        dy = np.where(vertical, 1.0 / lam, s_fin / (1.0 + lam * s_fin))
        return y, lambda x: dy * x

    @property
    def has_action(self) -> bool:
        return not self.graph.multivalued

    def action_pair(self, u):
        if self.graph.multivalued:
            raise CapabilityError(f"{self.label} is multivalued; no single-valued action")
        lo, _ = self.graph.value_bounds(u)
        slope = self.graph.slope_at(u)
        return lo, lambda x: slope * x

    def scaled(self, c):
        return SeparableOperator(self.graph.scaled(c), self.dimension, self.weight, self.label)


class SubdifferentialOperator(OperatorSpec):
    """Subdifferential of a convex function spec.

    Delegates to the separable graph machinery when the function is
    coordinate-wise, and to the linear machinery for quadratics; either way
    the resolvent is exactly the proximal map.
    """

    selfadjoint = True

    def __init__(
        self,
        fn: ConvexFunctionSpec,
        dimension: int | None = None,
        weight: float = 1.0,
        label: str | None = None,
    ):
        self.fn = fn
        self.label = label or f"subdiff({fn.label})"
        if fn.graph is not None:
            self._inner = SeparableOperator(fn.graph, dimension, weight, self.label)
        else:
            if dimension is not None and dimension != fn.matrix.n:
                raise ConfigurationError("dimension does not match the quadratic's matrix")
            self._inner = LinearOperator(fn.matrix, weight, self.label)
        self.dimension = self._inner.dimension
        self.weight = float(weight)
        self.linear = self._inner.linear

    def resolvent(self, lam, w, tol=RESOLVENT_TOL):
        return self._inner.resolvent(lam, w, tol)

    def yosida_pair(self, lam, w, tol=RESOLVENT_TOL):
        return self._inner.yosida_pair(lam, w, tol)

    @property
    def has_action(self) -> bool:
        return self._inner.has_action

    def action_pair(self, u):
        return self._inner.action_pair(u)

    def scaled(self, c):
        return SubdifferentialOperator(self.fn.scaled(c), self.dimension, self.weight)


class FormSumOperator(OperatorSpec):
    """Schrodinger-type form sum: action u -> Lu + q*u for a potential q."""

    linear = True
    selfadjoint = True

    def __init__(
        self,
        laplacian: SymSparseMatrix,
        potential,
        weight: float = 1.0,
        label: str = "form_sum",
    ):
        potential = as_vector(potential)
        if len(potential) != laplacian.n:
            raise ConfigurationError("potential length does not match the Laplacian")
        self.laplacian = laplacian
        self.potential = potential
        self.dimension = laplacian.n
        self.weight = float(weight)
        self.label = label

    def matvec(self, u):
        return self.laplacian.matvec(u) + self.potential * u

    def _solve(self, lam, b, tol, lenient=False):
        matvec = lambda v: v + lam * self.matvec(v)
        x, relres, ok = _cg_matvec(
            matvec, b, tol, 10 * self.dimension, stall_limit=40 if lenient else None
        )
        if not ok and not lenient:
            raise NonConvergenceError(
                f"form-sum resolvent stalled at {relres:.3e}", best=x, residual=relres
            )
        return x

    def resolvent(self, lam, w, tol=RESOLVENT_TOL):
        return self._solve(lam, self.check_vector(w), tol)

    def yosida_pair(self, lam, w, tol=RESOLVENT_TOL):
        solve_tol = min(tol, _YOSIDA_SOLVE_TOL)
        value = self.matvec(self._solve(lam, self.check_vector(w), solve_tol, lenient=True))
        return value, lambda x: self.matvec(self._solve(lam, x, solve_tol, lenient=True))

    @property
    def has_action(self) -> bool:
        return True

    def action_pair(self, u):
        return self.matvec(u), self.matvec

    def scaled(self, c):
        return FormSumOperator(self.laplacian.scaled(c), c * self.potential, self.weight)


class GeneralLinearOperator(OperatorSpec):
    """Dense monotone linear operator, not necessarily selfadjoint.

    Exists for the acute-angle counterexample (a skew perturbation of a
    multiple of the identity); kept dense and small on purpose.
    """

    linear = True

    def __init__(self, mat, weight: float = 1.0, label: str = "general_linear"):
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ConfigurationError("expected a square matrix")
        sym = 0.5 * (mat + mat.T)
        evals = np.linalg.eigvalsh(sym)
        if evals.size and evals[0] < -1e-10 * max(1.0, np.max(np.abs(mat))):
            raise ConfigurationError("matrix is not monotone (symmetric part not PSD)")
        self.mat = mat
        self.dimension = mat.shape[0]
        self.selfadjoint = bool(np.allclose(mat, mat.T, atol=1e-14))
        self.weight = float(weight)
        self.label = label

    def resolvent(self, lam, w, tol=RESOLVENT_TOL):
        w = self.check_vector(w)
        return np.linalg.solve(np.eye(self.dimension) + lam * self.mat, w)

    def yosida_pair(self, lam, w, tol=RESOLVENT_TOL):
        shifted = np.eye(self.dimension) + lam * self.mat
        value = self.mat @ np.linalg.solve(shifted, self.check_vector(w))
        return value, lambda x: self.mat @ np.linalg.solve(shifted, x)

    @property
    def has_action(self) -> bool:
        return True

    def action_pair(self, u):
        return self.mat @ u, lambda x: self.mat @ x

    def scaled(self, c):
        return GeneralLinearOperator(c * self.mat, self.weight, self.label)


def zero_operator(n: int, weight: float = 1.0) -> LinearOperator:
    return LinearOperator(SymSparseMatrix.zero(n), weight, label="zero")


def identity_operator(n: int, weight: float = 1.0) -> LinearOperator:
    return LinearOperator(SymSparseMatrix.identity(n), weight, label="identity")


# -- module-level operation surface ---------------------------------------


def resolvent(T: OperatorSpec, lam: float, w, tol: float = RESOLVENT_TOL) -> np.ndarray:
    """J_lam(w): the unique u with w in u + lam*T(u)."""
    if lam <= 0:
        raise ConfigurationError("resolvent parameter lambda must be positive")
    return T.resolvent(lam, as_vector(w), tol)


def yosida(T: OperatorSpec, lam: float, w, tol: float = RESOLVENT_TOL) -> np.ndarray:
    """T_lam(w) = (w - J_lam(w)) / lam, evaluated in graph form."""
    if lam <= 0:
        raise ConfigurationError("yosida parameter lambda must be positive")
    return T.yosida(lam, w, tol)


def moreau_envelope(f: ConvexFunctionSpec, lam: float, x, tol: float = RESOLVENT_TOL) -> float:
    """inf_v { f(v) + ||x - v||^2 / (2*lam) }, finite even where f(x) = +inf."""
    if lam <= 0:
        raise ConfigurationError("envelope parameter lambda must be positive")
    x = as_vector(x)
    p = f.prox(lam, x, tol)
    return f.value(p) + float(np.dot(x - p, x - p)) / (2.0 * lam)


def minimal_section_norm(g: ScalarMonotoneGraph, x: float) -> float:
    """min{|y| : y in g(x)}; DomainError when x is outside the graph domain."""
    return g.minimal_section(float(x))
