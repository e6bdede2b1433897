"""Implicit-Euler integration of du/dt + Au + Bu in f, u(0) = 0.

Each step is one resolvent evaluation of the scaled sum tau*(A+B); the
problem's strategy picks how that resolvent is computed: direct algebraic
solve, variational filter limit (re-run per step with warm starts), or a
single linear solve for form sums.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from monosum.errors import ConfigurationError, MonosumError, NonConvergenceError
from monosum.linalg import _cg_matvec, as_vector
from monosum.monotone import OperatorSpec
from monosum.reports import ConvergenceReport, DiagnosticReport, PathRecord, to_plain
from monosum.sums import (
    FilterPath,
    algebraic_sum_resolvent,
    sum_inclusion_residual,
    variational_sum_resolvent,
)

STRATEGIES = ("algebraic", "variational", "form_sum")


class Forcing:
    """Time-dependent right-hand side sampled at step endpoints."""

    label = "forcing"

    def at(self, t: float, dim: int) -> np.ndarray:
        raise NotImplementedError

    def covers(self, horizon: float) -> bool:
        return True


class ZeroForcing(Forcing):
    label = "zero"

    def at(self, t, dim):
        return np.zeros(dim)


class ConstantForcing(Forcing):
    """f(t) = c for a fixed vector (or scalar broadcast at evaluation)."""

    def __init__(self, value, label: str = "constant"):
        self.value = np.atleast_1d(np.asarray(value, dtype=np.float64))
        self.label = label

    def at(self, t, dim):
        if self.value.size == 1:
            return np.full(dim, self.value[0])
        if self.value.size != dim:
            raise ConfigurationError("forcing vector length does not match the state")
        return self.value.copy()


class TableForcing(Forcing):
    """Piecewise-constant-in-time table: value j holds on [t_j, t_{j+1})."""

    def __init__(self, times, values, label: str = "table"):
        self.times = np.asarray(times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if self.times.ndim != 1 or len(self.times) != len(self.values):
            raise ConfigurationError("forcing table needs matching times and values")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigurationError("forcing table times must be strictly increasing")
        self.label = label

    def covers(self, horizon):
        return self.times[0] <= 0.0 and self.times[-1] >= horizon - 1e-12

    def at(self, t, dim):
        j = int(np.searchsorted(self.times, t, side="right") - 1)
        j = min(max(j, 0), len(self.values) - 1)
        row = np.atleast_1d(self.values[j])
        if row.size == 1:
            return np.full(dim, row[0])
        return np.asarray(row, dtype=np.float64).copy()


class CallableForcing(Forcing):
    def __init__(self, fn, label: str = "callable"):
        self.fn = fn
        self.label = label

    def at(self, t, dim):
        out = np.atleast_1d(np.asarray(self.fn(t), dtype=np.float64))
        if out.size == 1 and dim > 1:
            return np.full(dim, out[0])
        return out


@dataclass
class EvolutionProblem:
    """Evolution inclusion data; the initial state defaults to zero."""

    A: OperatorSpec
    B: OperatorSpec
    forcing: Forcing
    horizon: float
    dim: int
    initial_state: np.ndarray | None = None
    strategy: str = "algebraic"
    path: FilterPath | None = None

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigurationError("horizon must be positive")
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"strategy must be one of {STRATEGIES}")
        if self.initial_state is None:
            self.initial_state = np.zeros(self.dim)
        else:
            self.initial_state = as_vector(self.initial_state)
            if len(self.initial_state) != self.dim:
                raise ConfigurationError("initial state length does not match dim")
        if not self.forcing.covers(self.horizon):
            raise ConfigurationError("forcing samples do not cover [0, T]")
        if self.strategy == "form_sum" and not (self.A.linear and self.B.linear):
            raise ConfigurationError("form_sum strategy needs linear operators")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (steps+1, dim)
    residuals: np.ndarray  # (steps,), per-step inclusion residuals (nan if unknown)
    tau: float
    strategy: str
    tolerance: float
    meta: dict = field(default_factory=dict)

    def final(self) -> np.ndarray:
        return self.states[-1]

    def csv_rows(self):
        header = ["t"] + [f"u_{i + 1}" for i in range(self.states.shape[1])]
        rows = [[t] + list(state) for t, state in zip(self.times, self.states)]
        return header, rows

    def to_payload(self) -> dict:
        return to_plain(
            {
                "kind": "trajectory",
                "tau": self.tau,
                "strategy": self.strategy,
                "tolerance": self.tolerance,
                "times": self.times,
                "states": self.states,
                "residuals": self.residuals,
                "meta": self.meta,
            }
        )


def _step_resolvent(problem, sA, sB, w, tol, warm):
    if problem.strategy == "algebraic":
        return algebraic_sum_resolvent(sA, sB, w, tol=tol)
    if problem.strategy == "variational":
        # deeper default than the module-level path: the scaled operators'
        # stiffness depends on tau, and a non-converged step is a failure
        # here, not a finding
        path = problem.path if problem.path is not None else FilterPath.diagonal(40)
        u, rep = variational_sum_resolvent(sA, sB, w, path=path, tol=tol, x0=warm)
        if not rep.converged:
            raise NonConvergenceError(
                f"variational step did not converge: {rep.verdict}",
                best=u,
                residual=rep.final_diff(),
            )
        return u
    # form_sum: one CG solve on the folded linear action
    matvec = lambda v: v + sA.action(v) + sB.action(v)
    x, relres, ok = _cg_matvec(matvec, w, 1e-12, 10 * len(w))
    if not ok:
        raise MonosumError(f"form-sum step solve stalled at {relres:.3e}")
    return x


def implicit_euler_solve(problem: EvolutionProblem, steps: int, tol: float = 1e-8) -> Trajectory:
    """March u_{i+1} = J_tau^{A+B}(u_i + tau*f(t_{i+1})) to the horizon.

    Forcing is evaluated at the right endpoint (fully implicit). The per-step
    solver tolerance is tol/steps, keeping the accumulated solver error at
    the level of tol. A failing step raises with the partial trajectory and
    the failing index attached.
    """
    if steps < 1:
        raise ConfigurationError("steps must be a positive integer")
    tau = problem.horizon / steps
    step_tol = tol / steps
    sA = problem.A.scaled(tau)
    sB = problem.B.scaled(tau)
    u = problem.initial_state.copy()
    times = np.linspace(0.0, problem.horizon, steps + 1)
    states = np.empty((steps + 1, problem.dim))
    residuals = np.full(steps, math.nan)
    states[0] = u
    for i in range(steps):
        t_next = times[i + 1]
        w = u + tau * problem.forcing.at(t_next, problem.dim)
        try:
            u = _step_resolvent(problem, sA, sB, w, step_tol, warm=u)
        except MonosumError as exc:
            exc.partial_trajectory = Trajectory(
                times[: i + 1], states[: i + 1].copy(), residuals[:i].copy(),
                tau, problem.strategy, tol, {"failed_step": i},
            )
            exc.failed_step = i
            raise
        states[i + 1] = u
        residuals[i] = sum_inclusion_residual(sA, sB, u, w)
    return Trajectory(
        times,
        states,
        residuals,
        tau,
        problem.strategy,
        tol,
        {"forcing": problem.forcing.label, "steps": steps},
    )


def step_convergence_study(
    problem: EvolutionProblem,
    steps_list,
    reference_steps: int,
    tol: float = 1e-8,
) -> ConvergenceReport:
    """Errors at the horizon against a finer reference run, with the
    observed order log(e_i/e_{i+1}) / log(s_{i+1}/s_i)."""
    steps_list = sorted(int(s) for s in steps_list)
    if not steps_list:
        raise ConfigurationError("steps_list must be nonempty")
    if reference_steps < 4 * max(steps_list):
        raise ConfigurationError("reference_steps must be at least 4 * max(steps_list)")
    ref = implicit_euler_solve(problem, reference_steps, tol).final()
    records = []
    errors = []
    for s in steps_list:
        traj = implicit_euler_solve(problem, s, tol)
        err = float(np.linalg.norm(traj.final() - ref))
        errors.append(err)
        records.append(
            PathRecord(problem.horizon / s, 0.0, float(np.linalg.norm(traj.final())), err)
        )
    orders = []
    for (s1, e1), (s2, e2) in zip(zip(steps_list, errors), zip(steps_list[1:], errors[1:])):
        if e1 > 0 and e2 > 0:
            orders.append(math.log(e1 / e2) / math.log(s2 / s1))
    rate = float(np.mean(orders)) if orders else math.nan
    nonincreasing = all(e2 <= e1 for e1, e2 in zip(errors, errors[1:]))
    verdict = (
        f"observed order {rate:.3f} over steps {steps_list} "
        f"(reference {reference_steps}); errors "
        + ("nonincreasing" if nonincreasing else "NOT monotone")
    )
    return ConvergenceReport(
        records=records,
        converged=nonincreasing,
        limit=ref,
        rate=rate,
        tolerance=tol,
        verdict=verdict,
    )


def flow_nonexpansiveness_check(
    problem: EvolutionProblem,
    u0_a,
    u0_b,
    steps: int,
    tol: float = 1e-9,
) -> DiagnosticReport:
    """Two runs differing only in the initial state; the gap sequence
    ||u_i^a - u_i^b|| must be nonincreasing up to 1e-10 slack."""
    base = problem
    pa = EvolutionProblem(
        base.A, base.B, base.forcing, base.horizon, base.dim,
        initial_state=as_vector(u0_a), strategy=base.strategy, path=base.path,
    )
    pb = EvolutionProblem(
        base.A, base.B, base.forcing, base.horizon, base.dim,
        initial_state=as_vector(u0_b), strategy=base.strategy, path=base.path,
    )
    ta = implicit_euler_solve(pa, steps, tol)
    tb = implicit_euler_solve(pb, steps, tol)
    gaps = np.linalg.norm(ta.states - tb.states, axis=1)
    growth = np.diff(gaps)
    worst = float(growth.max()) if growth.size else 0.0
    worst_idx = int(growth.argmax()) + 1 if growth.size else 0
    return DiagnosticReport(
        kind="flow_nonexpansiveness",
        samples=steps,
        witness=ta.states[worst_idx] - tb.states[worst_idx],
        worst_value=worst,
        passed=worst <= 1e-10,
        tolerance=1e-10,
        comparison="<=",
        details={"gaps": gaps.tolist()},
    )
