"""Operator sums and their diagnostics.

The variational-sum resolvent follows the two-parameter regularized
equation u + A_lam(u) + B_mu(u) = w along a filter path shrinking to the
origin, declaring convergence by a sustained Cauchy criterion. The
algebraic sum solves w in u + Au + Bu directly (Newton when both actions
are smooth, alternating-resolvent splitting otherwise), and three
diagnostics probe when the two constructions coincide: resolvent
commutation, the acute-angle condition, and boundedness of the
Yosida family along the path.
"""

import math
from dataclasses import dataclass

import numpy as np

from monosum.errors import CapabilityError, ConfigurationError, NonConvergenceError
from monosum.linalg import as_vector, guarded_newton, inner
from monosum.monotone import OperatorSpec, RESOLVENT_TOL
from monosum.reports import ConvergenceReport, DiagnosticReport, PathRecord

PATH_TAIL_MAX = 1e-6
CAUCHY_RUN = 3
ACUTE_ANGLE_FLOOR = -1e-10
BOUNDEDNESS_SLOPE_MAX = 0.05


@dataclass(frozen=True)
class FilterPath:
    """Strictly shrinking sequence of (lambda, mu) regularization pairs.

    Every pair must lie in {lambda, mu >= 0, lambda + mu != 0}, the running
    maximum must be strictly decreasing, and the final maximum must reach
    1e-6 or below.
    """

    pairs: tuple[tuple[float, float], ...]
    label: str = "path"

    def __post_init__(self):
        if not self.pairs:
            raise ConfigurationError("filter path needs at least one pair")
        prev = math.inf
        for lam, mu in self.pairs:
            if lam < 0 or mu < 0 or lam + mu == 0:
                raise ConfigurationError(f"pair ({lam}, {mu}) outside the admissible set")
            cur = max(lam, mu)
            if cur >= prev:
                raise ConfigurationError("max(lambda, mu) must be strictly decreasing")
            prev = cur
        if prev > PATH_TAIL_MAX:
            raise ConfigurationError(f"path must end with max(lambda, mu) <= {PATH_TAIL_MAX}")

    def __len__(self):
        return len(self.pairs)

    @classmethod
    def diagonal(cls, depth: int = 22, ratio: float = 0.5) -> "FilterPath":
        """lambda_k = mu_k = ratio**k, k = 0..depth (the default path)."""
        pairs = tuple((ratio**k, ratio**k) for k in range(depth + 1))
        return cls(pairs, label=f"diagonal(depth={depth})")

    @classmethod
    def two_speed(cls, depth: int = 22) -> "FilterPath":
        """lambda_k = 2^-k, mu_k = 4^-k: the declared alternate path."""
        pairs = tuple((0.5**k, 0.25**k) for k in range(depth + 1))
        return cls(pairs, label=f"two_speed(depth={depth})")

    @classmethod
    def second_only(cls, depth: int = 22, ratio: float = 0.5) -> "FilterPath":
        """lambda fixed at 0, mu_k = ratio**k (single-regularization sweeps)."""
        pairs = tuple((0.0, ratio**k) for k in range(depth + 1))
        return cls(pairs, label=f"second_only(depth={depth})")


def _in_admissible_set(lam: float, mu: float) -> None:
    if lam < 0 or mu < 0 or lam + mu == 0:
        raise ConfigurationError(f"({lam}, {mu}) outside {{lambda, mu >= 0, lambda+mu != 0}}")


def _term_pair(T: OperatorSpec, p: float, u: np.ndarray, tol: float):
    if p == 0.0:
        return T.action_pair(u)
    return T.yosida_pair(p, u, tol)


def regularized_resolvent(
    A: OperatorSpec,
    B: OperatorSpec,
    lam: float,
    mu: float,
    w,
    tol: float = 1e-10,
    x0=None,
) -> np.ndarray:
    """Solve u + A_lam(u) + B_mu(u) = w (Yosida terms; a vanishing parameter
    means the unregularized operator, which must then be single-valued).

    The Yosida terms are Lipschitz and monotone, so the residual is strongly
    monotone and the damped Newton iteration converges from any start.
    """
    _in_admissible_set(lam, mu)
    w = A.check_vector(B.check_vector(as_vector(w)))
    inner_tol = RESOLVENT_TOL

    def residual(x):
        fa, ja = _term_pair(A, lam, x, inner_tol)
        fb, jb = _term_pair(B, mu, x, inner_tol)
        return x + fa + fb - w, lambda v: v + ja(v) + jb(v)

    start = w if x0 is None else as_vector(x0)
    return guarded_newton(residual, start, tol)


def _rate_estimate(diffs) -> float:
    ratios = [
        math.log2(a / b)
        for a, b in zip(diffs[:-1], diffs[1:])
        if a > 0 and b > 0 and a != b
    ]
    if not ratios:
        return math.nan
    tail = ratios[-5:]
    return float(sum(tail) / len(tail))


def variational_sum_resolvent(
    A: OperatorSpec,
    B: OperatorSpec,
    w,
    path: FilterPath | None = None,
    tol: float = 1e-8,
    x0=None,
):
    """Resolvent of the variational sum at w: the filter limit of the
    regularized solutions u_{lam,mu}.

    Walks the path with warm starts, declares convergence once the Cauchy
    criterion ||u_k - u_{k+1}|| <= tol*(1 + ||u_k||) holds for three
    consecutive steps, and returns (limit, ConvergenceReport). Path
    exhaustion without convergence is reported, not raised: a divergent
    sweep is a finding.
    """
    if path is None:
        path = FilterPath.diagonal()
    w = as_vector(w)
    # early path points only seed the warm starts, so their inner solves may
    # be proportionally looser; accuracy tightens to tol/100 near the tail,
    # where the regularized systems are also best conditioned
    scale = 1.0 + float(np.linalg.norm(w))
    newton_tol = lambda lam, mu: scale * max(tol / 100.0, min(1e-3, (lam + mu) * 1e-4))
    records: list[PathRecord] = []
    u_prev = None
    u = None
    warm = x0
    run = 0
    converged = False
    for lam, mu in path.pairs:
        u_new = regularized_resolvent(A, B, lam, mu, w, tol=newton_tol(lam, mu), x0=warm)
        u_prev, u = u, u_new
        if u_prev is None:
            records.append(PathRecord(lam, mu, float(np.linalg.norm(u)), math.nan))
        else:
            diff = float(np.linalg.norm(u - u_prev))
            records.append(PathRecord(lam, mu, float(np.linalg.norm(u)), diff))
            if diff <= tol * (1.0 + float(np.linalg.norm(u_prev))):
                run += 1
            else:
                run = 0
            if run >= CAUCHY_RUN:
                converged = True
        warm = u
        if converged:
            break

    diffs = [r.successive_diff for r in records if not math.isnan(r.successive_diff)]
    rate = _rate_estimate(diffs)
    richardson = None
    if u_prev is not None and len(diffs) >= 2 and diffs[-2] > 0:
        rho = diffs[-1] / diffs[-2]
        if 0.0 < rho < 1.0:
            richardson = u + (u - u_prev) * rho / (1.0 - rho)
    if converged:
        verdict = (
            f"converged: Cauchy criterion at tol {tol:g} sustained for "
            f"{CAUCHY_RUN} consecutive steps on {path.label}"
        )
    else:
        verdict = (
            f"not converged: path {path.label} exhausted without sustaining the "
            f"Cauchy criterion at tol {tol:g} (finding, not an error)"
        )
    report = ConvergenceReport(
        records=records,
        converged=converged,
        limit=u.copy(),
        rate=rate,
        tolerance=tol,
        verdict=verdict,
        richardson=richardson,
    )
    return u, report


def algebraic_sum_resolvent(
    A: OperatorSpec,
    B: OperatorSpec,
    w,
    tol: float = 1e-10,
    max_iter: int = 20000,
) -> np.ndarray:
    """Solve w in u + Au + Bu directly.

    Newton handles the case where both operators have single-valued actions;
    otherwise an alternating-resolvent splitting with averaging factor 1/2
    (applied to A and the shifted operator B + I - w) iterates to a fixed
    point.
    """
    w = A.check_vector(B.check_vector(as_vector(w)))
    if A.has_action and B.has_action:

        def residual(x):
            fa, ja = A.action_pair(x)
            fb, jb = B.action_pair(x)
            return x + fa + fb - w, lambda v: v + ja(v) + jb(v)

        return guarded_newton(residual, w, tol)

    gamma = 1.0
    scale = 1.0 + float(np.linalg.norm(w))
    z = w.copy()
    u = None
    for _ in range(max_iter):
        u = A.resolvent(gamma, z, RESOLVENT_TOL)
        # J of the shifted operator B + I - w at parameter gamma
        v = B.resolvent(gamma / (1.0 + gamma), (2.0 * u - z + gamma * w) / (1.0 + gamma),
                        RESOLVENT_TOL)
        step = v - u
        z = z + step
        if float(np.linalg.norm(step)) <= tol * scale:
            return A.resolvent(gamma, z, RESOLVENT_TOL)
    raise NonConvergenceError(
        f"splitting iteration did not reach tol {tol:g} in {max_iter} iterations",
        best=u,
        residual=float(np.linalg.norm(step)),
    )


def sum_inclusion_residual(A: OperatorSpec, B: OperatorSpec, u, w) -> float:
    """Distance of w - u - Au to the set Bu (nan when not computable).

    Exact for single-valued pairs; for a multivalued separable B the
    distance to the coordinate-wise value interval is used.
    """
    u = as_vector(u)
    w = as_vector(w)
    if not A.has_action:
        if B.has_action:
            return sum_inclusion_residual(B, A, u, w)
        return math.nan
    r = w - u - A.action(u)
    if B.has_action:
        return float(np.linalg.norm(r - B.action(u)))
    graph = getattr(B, "graph", None)
    if graph is None:
        inner_op = getattr(B, "_inner", None)
        graph = getattr(inner_op, "graph", None)
    if graph is not None:
        lo, hi = graph.value_bounds(u)
        return float(np.linalg.norm(r - np.clip(r, lo, hi)))
    return math.nan


def check_resolvent_commutation(
    A: OperatorSpec,
    B: OperatorSpec,
    lambdas,
    mus,
    samples: int,
    tol: float,
    seed: int = 0,
) -> DiagnosticReport:
    """Worst relative commutator ||J^A J^B w - J^B J^A w|| / ||w|| on random
    samples; both operators must be linear."""
    if not (A.linear and B.linear):
        raise CapabilityError("resolvent commutation is checked for linear operators only")
    n = A.dimension
    rng = np.random.default_rng(seed)
    worst = -1.0
    witness = None
    worst_pair = (math.nan, math.nan)
    for _ in range(samples):
        w = rng.standard_normal(n)
        wn = float(np.linalg.norm(w))
        for lam in lambdas:
            for mu in mus:
                ab = A.resolvent(lam, B.resolvent(mu, w))
                ba = B.resolvent(mu, A.resolvent(lam, w))
                val = float(np.linalg.norm(ab - ba)) / wn
                if val > worst:
                    worst, witness, worst_pair = val, w.copy(), (lam, mu)
    return DiagnosticReport(
        kind="commutation",
        samples=samples,
        witness=witness,
        worst_value=worst,
        passed=worst <= tol,
        tolerance=tol,
        comparison="<=",
        details={"worst_lambda": worst_pair[0], "worst_mu": worst_pair[1], "seed": seed},
    )


def check_acute_angle(
    A: OperatorSpec,
    B: OperatorSpec,
    lambdas,
    mus,
    samples: int,
    seed: int = 0,
) -> DiagnosticReport:
    """Estimate min <A_lam u, B_mu u> over random states and the parameter
    grid, in the mesh-weighted inner product; pass iff the minimum stays
    above -1e-10."""
    if not A.selfadjoint:
        raise CapabilityError("acute-angle check requires a selfadjoint first operator")
    n = A.dimension if A.dimension is not None else B.dimension
    if n is None:
        raise ConfigurationError("cannot infer dimension for the acute-angle samples")
    rng = np.random.default_rng(seed)
    worst = math.inf
    witness = None
    worst_pair = (math.nan, math.nan)
    for _ in range(samples):
        u = rng.standard_normal(n)
        for lam in lambdas:
            for mu in mus:
                val = inner(A.yosida(lam, u), B.yosida(mu, u), A.weight)
                if val < worst:
                    worst, witness, worst_pair = val, u.copy(), (lam, mu)
    return DiagnosticReport(
        kind="acute_angle",
        samples=samples,
        witness=witness,
        worst_value=worst,
        passed=worst >= ACUTE_ANGLE_FLOOR,
        tolerance=ACUTE_ANGLE_FLOOR,
        comparison=">=",
        details={"worst_lambda": worst_pair[0], "worst_mu": worst_pair[1], "seed": seed},
    )


def boundedness_diagnostic(
    A: OperatorSpec,
    B: OperatorSpec,
    w,
    path: FilterPath,
) -> DiagnosticReport:
    """Track ||B_mu u_mu|| for solutions of u + Au + B_mu u = w along the
    path's mu values (the first operator stays unregularized).

    Pass iff the family shows no growth trend: the slope of log-norm against
    log(1/mu) over the last five points stays below 0.05.
    """
    w = as_vector(w)
    mus = [mu for _, mu in path.pairs]
    if any(mu == 0 for mu in mus):
        raise ConfigurationError("boundedness sweep needs strictly positive mu values")
    norms = []
    series = []
    u = None
    warm = None
    scale = 1.0 + float(np.linalg.norm(w))
    for mu in mus:
        u = regularized_resolvent(A, B, 0.0, mu, w, tol=scale * max(1e-10, mu * 1e-4), x0=warm)
        warm = u
        bn = float(np.linalg.norm(B.yosida(mu, u)))
        norms.append(bn)
        series.append((0.0, mu, bn, math.nan))
    tail = norms[-5:]
    tail_mus = mus[-5:]
    if max(tail) <= 1e-14:
        slope = 0.0
    else:
        xs = np.log([1.0 / m for m in tail_mus])
        ys = np.log(np.maximum(tail, 1e-30))
        slope = float(np.polyfit(xs, ys, 1)[0])
    return DiagnosticReport(
        kind="boundedness",
        samples=len(mus),
        witness=u,
        worst_value=slope,
        passed=slope <= BOUNDEDNESS_SLOPE_MAX,
        tolerance=BOUNDEDNESS_SLOPE_MAX,
        comparison="<=",
        details={"series": series, "norm_max": max(norms)},
    )
