"""Dense/sparse symmetric linear algebra used by every resolvent solve.

Vectors are plain 1-D ``numpy.float64`` arrays throughout the package; grid
metadata (mesh width, volume weight) travels on the operators built from a
grid, not on the arrays themselves.
"""

from dataclasses import dataclass, field

import numpy as np

from monosum.errors import (
    CapabilityError,
    ConfigurationError,
    MonotonicityError,
    NonConvergenceError,
)

DENSE_ORACLE_LIMIT = 512
CG_DEFAULT_TOL = 1e-12


def as_vector(x) -> np.ndarray:
    """Coerce scalars / lists to a contiguous float64 1-D array."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1:
        raise ConfigurationError(f"expected a vector, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def inner(u, v, weight: float = 1.0) -> float:
    """Mesh-weighted inner product weight * sum(u_i v_i)."""
    return float(weight * np.dot(u, v))


def norm(u, weight: float = 1.0) -> float:
    return float(np.sqrt(weight) * np.linalg.norm(u))


@dataclass(frozen=True)
class SymSparseMatrix:
    """Symmetric sparse matrix in coordinate form.

    Entries are supplied once per unordered index pair; the symmetric mirror
    is added on construction. Duplicate (i, j) coordinates accumulate, but
    supplying both (i, j) and (j, i) for i != j is rejected as ambiguous.

    With ``psd=True`` the matrix asserts positive semidefiniteness; for
    n <= 512 this is verified eagerly against the dense spectrum.
    """

    n: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    vals: np.ndarray = field(repr=False)
    psd: bool = True

    @classmethod
    def from_entries(cls, n: int, entries, psd: bool = True) -> "SymSparseMatrix":
        if n <= 0:
            raise ConfigurationError("matrix dimension must be positive")
        acc: dict[tuple[int, int], float] = {}
        seen_ordered: set[tuple[int, int]] = set()
        for i, j, v in entries:
            i, j, v = int(i), int(j), float(v)
            if not (0 <= i < n and 0 <= j < n):
                raise ConfigurationError(f"entry ({i},{j}) outside dimension {n}")
            if i != j and (j, i) in seen_ordered:
                raise ConfigurationError(
                    f"both ({i},{j}) and ({j},{i}) supplied; give one per unordered pair"
                )
            seen_ordered.add((i, j))
            key = (min(i, j), max(i, j))
            acc[key] = acc.get(key, 0.0) + v
        rows, cols, vals = [], [], []
        for (i, j), v in sorted(acc.items()):
            if v == 0.0:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(v)
            if i != j:
                rows.append(j)
                cols.append(i)
                vals.append(v)
        mat = cls(
            n=n,
            rows=np.asarray(rows, dtype=np.intp),
            cols=np.asarray(cols, dtype=np.intp),
            vals=np.asarray(vals, dtype=np.float64),
            psd=psd,
        )
        if psd and n <= DENSE_ORACLE_LIMIT:
            mat._check_psd()
        return mat

    @classmethod
    def zero(cls, n: int) -> "SymSparseMatrix":
        return cls.from_entries(n, [])

    @classmethod
    def identity(cls, n: int) -> "SymSparseMatrix":
        return cls.from_entries(n, [(i, i, 1.0) for i in range(n)])

    @classmethod
    def diagonal(cls, diag) -> "SymSparseMatrix":
        diag = as_vector(diag)
        psd = bool(np.all(diag >= 0.0))
        return cls.from_entries(len(diag), [(i, i, float(d)) for i, d in enumerate(diag)], psd=psd)

    def _check_psd(self) -> None:
        evals = np.linalg.eigvalsh(self.dense())
        floor = -1e-10 * self.max_abs()
        if evals.size and evals[0] < floor:
            raise ConfigurationError(
                f"psd flag set but smallest eigenvalue {evals[0]:.3e} < {floor:.3e}"
            )

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.vals))) if self.vals.size else 0.0

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if len(x) != self.n:
            raise ConfigurationError(f"vector length {len(x)} != dimension {self.n}")
        if not self.vals.size:
            return np.zeros(self.n)
        return np.bincount(self.rows, weights=self.vals * x[self.cols], minlength=self.n)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        np.add.at(out, (self.rows, self.cols), self.vals)
        return out

    def scaled(self, c: float) -> "SymSparseMatrix":
        if c < 0 and self.psd and self.vals.size:
            raise ConfigurationError("negative scaling would break the psd assertion")
        return SymSparseMatrix(self.n, self.rows, self.cols, self.vals * c, self.psd)

    def plus_diagonal(self, diag) -> "SymSparseMatrix":
        diag = as_vector(diag)
        if len(diag) != self.n:
            raise ConfigurationError("diagonal length mismatch")
        rows = np.concatenate([self.rows, np.arange(self.n)])
        cols = np.concatenate([self.cols, np.arange(self.n)])
        vals = np.concatenate([self.vals, diag])
        psd = self.psd and bool(np.all(diag >= 0.0))
        return SymSparseMatrix(self.n, rows, cols, vals, psd)


def _cg_matvec(matvec, b, tol, maxiter, x0=None, stall_limit=None):
    """Core CG on a matvec closure; returns (x, relative residual, converged).

    With ``stall_limit`` set, the iteration stops once that many consecutive
    steps fail to improve the best residual (round-off floor reached) and
    returns the best iterate seen; otherwise it runs to the cap. A
    non-positive curvature direction raises MonotonicityError unless the
    residual is already at round-off level.
    """
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0.0, True
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - matvec(x)
    p = r.copy()
    rr = float(np.dot(r, r))
    best_x, best_rr = x.copy(), rr
    stalled = 0
    for _ in range(maxiter):
        if np.sqrt(rr) <= tol * bnorm:
            return x, np.sqrt(rr) / bnorm, True
        Ap = matvec(p)
        pAp = float(np.dot(p, Ap))
        if pAp <= 0.0:
            if np.sqrt(best_rr) <= 1e-8 * bnorm:
                break
            raise MonotonicityError(
                "conjugate gradient met a non-positive curvature direction"
            )
        alpha = rr / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = float(np.dot(r, r))
        p = r + (rr_new / rr) * p
        rr = rr_new
        if rr < best_rr:
            best_rr = rr
            best_x = x.copy()
            stalled = 0
        else:
            stalled += 1
            if stall_limit is not None and stalled >= stall_limit:
                break
    relres = np.sqrt(best_rr) / bnorm
    return best_x, relres, relres <= tol


def cg_solve(M: SymSparseMatrix, shift: float, b, tol: float = CG_DEFAULT_TOL) -> np.ndarray:
    """Solve (shift*I + M) x = b for symmetric PSD M, shift >= 0.

    Deterministic for fixed inputs. Raises NonConvergenceError (with the last
    relative residual attached) after 10*n iterations without convergence.
    """
    b = as_vector(b)
    if shift < 0:
        raise ConfigurationError("shift must be nonnegative")
    if tol <= 0:
        raise ConfigurationError("tolerance must be positive")
    if len(b) != M.n:
        raise ConfigurationError(f"rhs length {len(b)} != dimension {M.n}")
    x, relres, ok = _cg_matvec(lambda v: shift * v + M.matvec(v), b, tol, 10 * M.n)
    if not ok:
        raise NonConvergenceError(
            f"cg hit the {10 * M.n}-iteration cap at relative residual {relres:.3e}",
            best=x,
            residual=relres,
        )
    return x


def dense_eigs(M: SymSparseMatrix):
    """Dense eigendecomposition oracle, ascending eigenvalues.

    Returns a list of (eigenvalue, eigenvector) pairs. Limited to
    n <= 512; larger requests raise CapabilityError.
    """
    if M.n > DENSE_ORACLE_LIMIT:
        raise CapabilityError(f"dense oracle limited to n <= {DENSE_ORACLE_LIMIT}, got {M.n}")
    evals, evecs = np.linalg.eigh(M.dense())
    return [(float(evals[i]), evecs[:, i].copy()) for i in range(M.n)]


def guarded_newton(residual, x0, tol: float, max_iter: int = 50, max_halvings: int = 30):
    """Damped Newton for monotone residuals with SPD Jacobians.

    ``residual(x)`` must return ``(F, jvp)`` where ``jvp(v)`` applies the
    (symmetric positive definite) Jacobian at x. Steps are halved, at most
    ``max_halvings`` times, until the residual norm decreases. Non-positive
    curvature seen by the inner CG solve raises MonotonicityError.
    """
    x = as_vector(x0).copy()
    F, jvp = residual(x)
    fnorm = float(np.linalg.norm(F))
    best_x, best_norm = x.copy(), fnorm
    for _ in range(max_iter):
        if fnorm <= tol:
            return x
        n = len(x)
        d, _, _ = _cg_matvec(jvp, -F, 1e-12, max(10 * n, 200), stall_limit=40)
        t = 1.0
        for _ in range(max_halvings + 1):
            x_try = x + t * d
            F_try, jvp_try = residual(x_try)
            fnorm_try = float(np.linalg.norm(F_try))
            if fnorm_try < fnorm:
                break
            t *= 0.5
        else:
            raise NonConvergenceError(
                f"newton stalled: no residual decrease after {max_halvings} halvings "
                f"(residual {fnorm:.3e})",
                best=best_x,
                residual=best_norm,
            )
        x, F, jvp, fnorm = x_try, F_try, jvp_try, fnorm_try
        if fnorm < best_norm:
            best_x, best_norm = x.copy(), fnorm
    if fnorm <= tol:
        return x
    raise NonConvergenceError(
        f"newton did not reach tol {tol:.3e} in {max_iter} iterations "
        f"(best residual {best_norm:.3e})",
        best=best_x,
        residual=best_norm,
    )
