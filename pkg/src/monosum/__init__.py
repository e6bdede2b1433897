"""monosum: resolvent calculus for maximal monotone operators.

Finite-dimensional resolvents and Moreau-Yosida approximations, variational
and algebraic operator sums with diagnostics, and an implicit-Euler solver
for evolution inclusions du/dt + Au + Bu in f with u(0) = 0.
"""

from monosum._kernels import BACKEND as kernel_backend
from monosum.convex import ConvexFunctionSpec, convex_pairs
from monosum.errors import (
    CapabilityError,
    ConfigurationError,
    DomainError,
    MonosumError,
    MonotonicityError,
    NonConvergenceError,
)
from monosum.evolution import (
    EvolutionProblem,
    Trajectory,
    flow_nonexpansiveness_check,
    implicit_euler_solve,
    step_convergence_study,
)
from monosum.graphs import (
    IntervalNormalConeGraph,
    PiecewiseLinearGraph,
    PolyGraph,
    SaturatingGraph,
    ScalarMonotoneGraph,
    SmoothCallableGraph,
)
from monosum.linalg import SymSparseMatrix, cg_solve, dense_eigs, guarded_newton
from monosum.monotone import (
    FormSumOperator,
    GeneralLinearOperator,
    LinearOperator,
    OperatorSpec,
    SeparableOperator,
    SubdifferentialOperator,
    identity_operator,
    minimal_section_norm,
    moreau_envelope,
    resolvent,
    yosida,
    zero_operator,
)
from monosum.problems import (
    GridSpec,
    PotentialSpec,
    build_form_sum,
    build_laplacian,
    form_sum_problem,
    make_reaction_graph,
    reaction_diffusion_problem,
    sample_potential,
)
from monosum.reports import ConvergenceReport, DiagnosticReport
from monosum.sums import (
    FilterPath,
    algebraic_sum_resolvent,
    boundedness_diagnostic,
    check_acute_angle,
    check_resolvent_commutation,
    regularized_resolvent,
    variational_sum_resolvent,
)

__version__ = "0.1.0"
