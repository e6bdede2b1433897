import math

import numpy as np
import pytest

from monosum.convex import convex_pairs, half_square, indicator_nonneg
from monosum.errors import CapabilityError, ConfigurationError
from monosum.graphs import IntervalNormalConeGraph, PiecewiseLinearGraph, PolyGraph
from monosum.linalg import SymSparseMatrix
from monosum.monotone import (
    LinearOperator,
    SeparableOperator,
    SubdifferentialOperator,
    identity_operator,
    resolvent,
    zero_operator,
)
from monosum.problems import (
    GridSpec,
    acute_angle_counterexample,
    build_laplacian,
    make_reaction_graph,
)
from monosum.sums import (
    FilterPath,
    algebraic_sum_resolvent,
    boundedness_diagnostic,
    check_acute_angle,
    check_resolvent_commutation,
    regularized_resolvent,
    sum_inclusion_residual,
    variational_sum_resolvent,
)

from oracles import prox_pair_closed_form


def sign_graph():
    return PiecewiseLinearGraph([(0.0, -1.0, 1.0)])


def laplacian_op(n):
    return LinearOperator(build_laplacian(GridSpec(1, n)))


class TestFilterPath:
    def test_default_paths_valid(self):
        for p in (FilterPath.diagonal(), FilterPath.two_speed(), FilterPath.second_only()):
            assert max(p.pairs[-1]) <= 1e-6

    def test_origin_pair_rejected(self):
        with pytest.raises(ConfigurationError):
            FilterPath(((0.0, 0.0),))

    def test_nondecreasing_rejected(self):
        with pytest.raises(ConfigurationError):
            FilterPath(((1.0, 1.0), (1.0, 0.5), (1e-7, 1e-7)))

    def test_fat_tail_rejected(self):
        with pytest.raises(ConfigurationError):
            FilterPath(((1.0, 1.0), (0.5, 0.5)))

    def test_negative_rejected(self):
        with pytest.raises(ConfigurationError):
            FilterPath(((-0.5, 1.0), (1e-7, 1e-7)))


class TestRegularizedResolvent:
    def test_zero_pair_is_identity(self):
        u = regularized_resolvent(zero_operator(2), zero_operator(2), 0.5, 0.25, [1.0, -2.0])
        assert np.allclose(u, [1.0, -2.0], atol=1e-12)

    def test_identity_yosida_closed_form(self):
        # A_1 u = u/2, so u + u/2 = 3
        u = regularized_resolvent(identity_operator(1), zero_operator(1), 1.0, 0.7, [3.0])
        assert u[0] == pytest.approx(2.0, abs=1e-10)

    def test_half_square_with_normal_cone(self):
        A = SubdifferentialOperator(half_square())
        B = SubdifferentialOperator(indicator_nonneg())
        u = regularized_resolvent(A, B, 1e-6, 1e-6, [-3.0])
        assert abs(u[0] - 0.0) <= 1e-5
        u = regularized_resolvent(A, B, 1e-6, 1e-6, [4.0])
        assert abs(u[0] - 2.0) <= 1e-5

    def test_admissible_set_enforced(self):
        z = zero_operator(1)
        with pytest.raises(ConfigurationError):
            regularized_resolvent(z, z, 0.0, 0.0, [1.0])
        with pytest.raises(ConfigurationError):
            regularized_resolvent(z, z, -1.0, 1.0, [1.0])

    def test_vanishing_parameter_needs_action(self):
        multivalued = SeparableOperator(sign_graph(), 1)
        with pytest.raises(CapabilityError):
            regularized_resolvent(multivalued, zero_operator(1), 0.0, 1.0, [1.0])

    def test_vanishing_parameter_with_linear_action(self):
        # u + u + B_0.5(u) = 3 saturates the sign Yosida at 1: u = 1
        B = SeparableOperator(sign_graph(), 1)
        u = regularized_resolvent(identity_operator(1), B, 0.0, 0.5, [3.0])
        assert u[0] == pytest.approx(1.0, abs=1e-10)


class TestVariationalSum:
    def test_zero_pair_converges_immediately(self):
        u, rep = variational_sum_resolvent(zero_operator(2), zero_operator(2), [0.5, -1.0])
        assert rep.converged
        assert np.allclose(u, [0.5, -1.0], atol=1e-10)
        assert len(rep.records) == 4  # three zero diffs after the first point

    @pytest.mark.parametrize("w,expected", [(-3.0, 0.0), (4.0, 2.0)])
    def test_half_square_normal_cone_pair(self, w, expected):
        A = SubdifferentialOperator(half_square())
        B = SubdifferentialOperator(indicator_nonneg())
        u, rep = variational_sum_resolvent(A, B, [w], tol=1e-5)
        assert rep.converged
        assert u[0] == pytest.approx(expected, abs=1e-5)

    def test_stiff_semilinear_matches_direct_newton(self):
        n = 16
        A = laplacian_op(n)
        B = SeparableOperator(PolyGraph(0.0, 1.0), n)
        rng = np.random.default_rng(0)
        w = rng.standard_normal(n)
        w /= np.linalg.norm(w)
        u, rep = variational_sum_resolvent(A, B, w, path=FilterPath.diagonal(48), tol=1e-7)
        direct = algebraic_sum_resolvent(A, B, w, tol=1e-11)
        assert rep.converged
        assert np.linalg.norm(u - direct) <= 1e-6

    def test_divergence_is_a_finding_not_an_error(self):
        A = SubdifferentialOperator(half_square())
        B = SubdifferentialOperator(indicator_nonneg())
        u, rep = variational_sum_resolvent(A, B, [-3.0], tol=1e-16)
        assert not rep.converged
        assert "not converged" in rep.verdict
        assert len(rep.records) == len(FilterPath.diagonal())

    def test_path_independence_on_convex_pairs(self):
        tol = 1e-6
        for name, phi, psi in convex_pairs():
            A = SubdifferentialOperator(phi)
            B = SubdifferentialOperator(psi)
            for w in (-3.0, 0.4, 4.0):
                u1, _ = variational_sum_resolvent(A, B, [w], tol=tol)
                u2, _ = variational_sum_resolvent(
                    A, B, [w], path=FilterPath.two_speed(), tol=tol
                )
                assert abs(u1[0] - u2[0]) <= 10 * tol, name

    def test_limit_equals_prox_of_sum(self):
        tol = 1e-5
        for name, phi, psi in convex_pairs():
            A = SubdifferentialOperator(phi)
            B = SubdifferentialOperator(psi)
            both = SubdifferentialOperator(phi.add(psi))
            for w in (-2.0, 0.3, 3.0):
                u, rep = variational_sum_resolvent(A, B, [w], tol=tol)
                assert rep.converged, name
                prox = resolvent(both, 1.0, [w])
                assert abs(u[0] - prox[0]) <= 10 * tol, name
                exact = prox_pair_closed_form(name, [w])[0]
                assert prox[0] == pytest.approx(exact, abs=1e-8), name
                assert abs(u[0] - exact) <= 1e-5, name

    def test_single_parameter_sweep_consistency(self):
        # unregularized first operator + Yosida on the second, mu -> 0
        n = 8
        A = laplacian_op(n)
        B = SeparableOperator(PolyGraph(0.0, 1.0), n)
        rng = np.random.default_rng(3)
        w = rng.standard_normal(n)
        w /= np.linalg.norm(w)
        u1, rep1 = variational_sum_resolvent(
            A, B, w, path=FilterPath.second_only(40), tol=1e-7
        )
        u2, rep2 = variational_sum_resolvent(
            A, B, w, path=FilterPath.diagonal(48), tol=1e-7
        )
        assert rep1.converged and rep2.converged
        assert np.linalg.norm(u1 - u2) <= 1e-6

    def test_rate_and_richardson_reported(self):
        n = 8
        A = laplacian_op(n)
        B = SeparableOperator(PolyGraph(0.0, 1.0), n)
        w = np.ones(n) / math.sqrt(n)
        u, rep = variational_sum_resolvent(A, B, w, path=FilterPath.diagonal(48), tol=1e-7)
        assert rep.rate == pytest.approx(1.0, abs=0.1)  # halving parameters
        assert rep.richardson is not None
        direct = algebraic_sum_resolvent(A, B, w, tol=1e-12)
        # extrapolation is reported as better evidence but never returned
        assert np.linalg.norm(rep.richardson - direct) <= np.linalg.norm(u - direct)


class TestAlgebraicSum:
    def test_zero_pair(self):
        u = algebraic_sum_resolvent(zero_operator(2), zero_operator(2), [3.0, -1.0])
        assert np.allclose(u, [3.0, -1.0], atol=1e-10)

    def test_scalar_sign_regime_enumeration(self):
        # 3 in u + u + d|u| has the single-regime solution 2u + 1 = 3
        A = LinearOperator(SymSparseMatrix.diagonal([1.0]))
        B = SeparableOperator(sign_graph(), 1)
        u = algebraic_sum_resolvent(A, B, [3.0], tol=1e-12)
        assert u[0] == pytest.approx(1.0, abs=1e-10)
        # residual certificate: w - u - Au must land inside Bu
        assert sum_inclusion_residual(A, B, u, [3.0]) <= 1e-9

    def test_agrees_with_variational_on_smooth_pair(self):
        n = 16
        A = laplacian_op(n)
        B = SeparableOperator(PolyGraph(0.0, 1.0), n)
        rng = np.random.default_rng(0)
        w = rng.standard_normal(n)
        w /= np.linalg.norm(w)
        ua = algebraic_sum_resolvent(A, B, w, tol=1e-11)
        uv, _ = variational_sum_resolvent(A, B, w, path=FilterPath.diagonal(48), tol=1e-7)
        assert np.linalg.norm(ua - uv) <= 1e-6

    def test_sum_resolvent_firmly_nonexpansive(self):
        n = 8
        A = laplacian_op(n)
        B = SeparableOperator(PolyGraph(0.0, 1.0), n)
        rng = np.random.default_rng(4)
        for _ in range(10):
            w1 = rng.standard_normal(n)
            w2 = rng.standard_normal(n)
            u1 = algebraic_sum_resolvent(A, B, w1, tol=1e-11)
            u2 = algebraic_sum_resolvent(A, B, w2, tol=1e-11)
            lhs = float(np.dot(u1 - u2, u1 - u2))
            rhs = float(np.dot(u1 - u2, w1 - w2))
            assert lhs <= rhs + 1e-8


class TestCommutation:
    def test_diagonal_pair_commutes(self):
        A = LinearOperator(SymSparseMatrix.diagonal([1.0, 2.0, 3.0]))
        B = LinearOperator(SymSparseMatrix.diagonal([0.5, 0.1, 4.0]))
        rep = check_resolvent_commutation(A, B, [1.0, 0.1], [1.0, 0.5], 10, 1e-12, seed=0)
        assert rep.passed
        assert rep.worst_value <= 1e-13

    def test_cospectral_polynomial_pair(self):
        n = 16
        L = build_laplacian(GridSpec(1, n))
        Ld = L.dense()
        sq = Ld @ Ld
        entries = [(i, j, sq[i, j]) for i in range(n) for j in range(i, n) if sq[i, j] != 0.0]
        B = LinearOperator(SymSparseMatrix.from_entries(n, entries))
        rep = check_resolvent_commutation(
            LinearOperator(L), B, [1.0, 0.1], [1.0, 0.1], 10, 1e-9, seed=0
        )
        assert rep.passed

    def test_laplacian_vs_generic_diagonal_fails(self):
        n = 16
        A = laplacian_op(n)
        diag = np.random.default_rng(0).uniform(0.5, 3.0, n)
        B = LinearOperator(SymSparseMatrix.diagonal(diag))
        rep = check_resolvent_commutation(A, B, [1.0, 0.1], [1.0, 0.1], 10, 1e-9, seed=0)
        assert not rep.passed
        assert rep.worst_value > 1e-3
        # frozen from the recorded seed-0 run; the witness is reproducible
        assert rep.worst_value == pytest.approx(0.04315041970479009, rel=1e-9)
        assert rep.witness is not None

    def test_nonlinear_spec_rejected(self):
        A = laplacian_op(4)
        B = SeparableOperator(PolyGraph(0.0, 1.0), 4)
        with pytest.raises(CapabilityError):
            check_resolvent_commutation(A, B, [1.0], [1.0], 1, 1e-9)


class TestAcuteAngle:
    def test_identity_pair_passes(self):
        A = identity_operator(3)
        rep = check_acute_angle(A, identity_operator(3), [1.0, 0.1], [1.0, 0.1], 20, seed=0)
        assert rep.passed
        assert rep.worst_value >= 0.0

    def test_laplacian_with_monotone_reactions_passes(self):
        n = 16
        A = laplacian_op(n)
        for name in ("cubic", "linear-ramp", "saturating", "sign-graph"):
            B = SeparableOperator(make_reaction_graph(name), n)
            rep = check_acute_angle(A, B, [1.0, 0.1], [1.0, 0.1], 20, seed=0)
            assert rep.passed, name

    def test_skew_counterexample_fails_with_witness(self):
        A, B = acute_angle_counterexample()
        rep = check_acute_angle(A, B, [1.0, 0.1], [1.0, 0.1], 50, seed=0)
        assert not rep.passed
        assert rep.worst_value < -1e-3
        # the witness reproduces the reported value
        lam = rep.details["worst_lambda"]
        mu = rep.details["worst_mu"]
        val = float(np.dot(A.yosida(lam, rep.witness), B.yosida(mu, rep.witness)))
        assert val == pytest.approx(rep.worst_value, rel=1e-9)

    def test_non_selfadjoint_first_operator_rejected(self):
        _, B = acute_angle_counterexample()
        with pytest.raises(CapabilityError):
            check_acute_angle(B, B, [1.0], [1.0], 1)


class TestBoundedness:
    def test_zero_operator_bounded(self):
        rep = boundedness_diagnostic(
            zero_operator(2), zero_operator(2), [1.0, 1.0], FilterPath.diagonal()
        )
        assert rep.passed
        assert rep.worst_value == 0.0

    def test_laplacian_cubic_bounded(self):
        n = 16
        A = laplacian_op(n)
        B = SeparableOperator(PolyGraph(0.0, 1.0), n)
        w = np.random.default_rng(0).standard_normal(n)
        rep = boundedness_diagnostic(A, B, w, FilterPath.diagonal())
        assert rep.passed

    def test_scalar_normal_cone_closed_form(self):
        A = zero_operator(1)
        B = SeparableOperator(IntervalNormalConeGraph(0.0, math.inf), 1)
        rep = boundedness_diagnostic(A, B, [-1.0], FilterPath.diagonal())
        assert rep.passed
        series = rep.details["series"]
        # u_mu = -mu/(1+mu), so ||B_mu u_mu|| = 1/(1+mu) <= 1
        for _, mu, nrm, _ in series:
            assert nrm == pytest.approx(1.0 / (1.0 + mu), abs=1e-8)
        assert rep.details["norm_max"] <= 1.0 + 1e-9

    def test_positive_mu_required(self):
        first_only = FilterPath(((1.0, 0.0), (1e-7, 0.0)))
        with pytest.raises(ConfigurationError):
            boundedness_diagnostic(zero_operator(1), zero_operator(1), [1.0], first_only)
