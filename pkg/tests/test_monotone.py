import math

import numpy as np
import pytest

from monosum.convex import (
    ConvexFunctionSpec,
    abs_function,
    half_square,
    indicator_nonneg,
    power4,
    quadratic,
)
from monosum.errors import ConfigurationError
from monosum.graphs import PiecewiseLinearGraph, PolyGraph
from monosum.monotone import (
    LinearOperator,
    SeparableOperator,
    SubdifferentialOperator,
    identity_operator,
    minimal_section_norm,
    moreau_envelope,
    resolvent,
    yosida,
    zero_operator,
)

from oracles import prox_grid_search
from zoo import operator_instances, random_psd_matrix


def sign_graph():
    return PiecewiseLinearGraph([(0.0, -1.0, 1.0)])


class TestResolventExamples:
    def test_zero_operator_is_identity(self):
        T = zero_operator(2)
        for lam in (0.1, 1.0, 100.0):
            assert np.allclose(resolvent(T, lam, [1.5, -2.0]), [1.5, -2.0], atol=1e-12)

    def test_identity_operator(self):
        T = identity_operator(3)
        u = resolvent(T, 1.0, [3.0, 0.0, 0.0])
        assert np.allclose(u, [1.5, 0.0, 0.0], atol=1e-12)

    def test_abs_subdifferential_scalar(self):
        T = SeparableOperator(sign_graph())
        # frozen from the scalar grid-minimization oracle
        assert resolvent(T, 0.5, [2.0])[0] == pytest.approx(1.5, abs=1e-12)
        assert resolvent(T, 0.5, [0.2])[0] == pytest.approx(0.0, abs=1e-12)
        for w in (2.0, 0.2):
            assert resolvent(T, 0.5, [w])[0] == pytest.approx(
                prox_grid_search(abs, 0.5, w), abs=1e-4
            )

    def test_lambda_validation(self):
        with pytest.raises(ConfigurationError):
            resolvent(zero_operator(1), 0.0, [1.0])

    def test_dimension_validation(self):
        with pytest.raises(ConfigurationError):
            resolvent(identity_operator(2), 1.0, [1.0, 2.0, 3.0])


class TestYosidaExamples:
    def test_zero_operator(self):
        assert np.allclose(yosida(zero_operator(2), 0.5, [3.0, -1.0]), 0.0)

    def test_identity_closed_form(self):
        out = yosida(identity_operator(1), 1.0, [3.0])
        assert out[0] == pytest.approx(1.5, abs=1e-12)  # w/(1+lam)

    def test_sign_graph_minimal_section_bound(self):
        T = SeparableOperator(sign_graph())
        out = yosida(T, 0.5, [0.2])
        assert out[0] == pytest.approx(0.4, abs=1e-12)
        assert abs(out[0]) <= 1.0

    def test_matches_difference_quotient(self):
        rng = np.random.default_rng(2)
        for label, T, n in operator_instances(rng)[:8]:
            w = rng.standard_normal(n)
            lam = 0.7
            quotient = (w - resolvent(T, lam, w)) / lam
            assert np.allclose(yosida(T, lam, w), quotient, atol=1e-8), label


class TestMoreauEnvelope:
    def test_zero_function(self):
        f = ConvexFunctionSpec("zero", lambda x: 0.0, graph=PolyGraph())
        for lam in (0.5, 2.0):
            assert moreau_envelope(f, lam, [0.3, -4.0]) == pytest.approx(0.0, abs=1e-14)

    def test_abs_huber_regime(self):
        # |x| <= lam: envelope is x^2 / (2 lam); frozen value 0.125 confirmed
        # by the grid oracle
        val = moreau_envelope(abs_function(), 1.0, [0.5])
        assert val == pytest.approx(0.125, abs=1e-10)
        v_star = prox_grid_search(abs, 1.0, 0.5)
        assert val == pytest.approx(abs(v_star) + 0.5 * (0.5 - v_star) ** 2, abs=1e-8)

    def test_indicator_half_squared_distance(self):
        val = moreau_envelope(indicator_nonneg(), 1.0, [-2.0])
        assert val == pytest.approx(2.0, abs=1e-12)

    def test_finite_where_function_is_infinite(self):
        f = indicator_nonneg()
        assert f.value([-2.0]) == math.inf
        assert math.isfinite(moreau_envelope(f, 0.3, [-2.0]))


class TestMinimalSectionNorm:
    def test_examples(self):
        assert minimal_section_norm(sign_graph(), 0.0) == 0.0
        assert minimal_section_norm(sign_graph(), 2.0) == 1.0
        assert minimal_section_norm(PolyGraph(0.0, 1.0), 2.0) == 8.0


class TestResolventCalculusProperties:
    def test_firm_nonexpansiveness_all_variants(self):
        rng = np.random.default_rng(10)
        for label, T, n in operator_instances(rng):
            for lam in (0.05, 1.0, 7.3):
                w1 = 3.0 * rng.standard_normal(n)
                w2 = 3.0 * rng.standard_normal(n)
                j1 = resolvent(T, lam, w1)
                j2 = resolvent(T, lam, w2)
                lhs = float(np.dot(j1 - j2, j1 - j2))
                rhs = float(np.dot(j1 - j2, w1 - w2))
                assert lhs <= rhs + 1e-8, label

    def test_yosida_lipschitz_and_monotone(self):
        rng = np.random.default_rng(11)
        for label, T, n in operator_instances(rng):
            for lam in (0.1, 1.0):
                w1 = 2.0 * rng.standard_normal(n)
                w2 = 2.0 * rng.standard_normal(n)
                y1 = yosida(T, lam, w1)
                y2 = yosida(T, lam, w2)
                assert (
                    np.linalg.norm(y1 - y2) <= np.linalg.norm(w1 - w2) / lam + 1e-8
                ), label
                assert float(np.dot(y1 - y2, w1 - w2)) >= -1e-8, label

    def test_graph_inclusion_for_separable(self):
        rng = np.random.default_rng(12)
        graphs = {
            "sign": sign_graph(),
            "cubic": PolyGraph(0.0, 1.0),
            "mixed": PolyGraph(1.0, 0.5),
        }
        for label, g in graphs.items():
            T = SeparableOperator(g)
            for lam in (0.05, 0.8):
                w = 4.0 * rng.standard_normal(32)
                u = resolvent(T, lam, w)
                y = yosida(T, lam, w)
                lo, hi = g.value_bounds(u)
                assert np.all(y >= lo - 1e-9) and np.all(y <= hi + 1e-9), label

    def test_yosida_approach_along_lambda(self):
        graphs = [sign_graph(), PolyGraph(0.0, 1.0), PolyGraph(1.0, 1.0)]
        xs = [-1.7, -0.3, 0.0, 0.9, 2.4]
        lams = [2.0**-k for k in range(21)]
        for g in graphs:
            T = SeparableOperator(g)
            for x in xs:
                norms = [abs(yosida(T, lam, [x])[0]) for lam in lams]
                assert all(b >= a - 1e-9 for a, b in zip(norms, norms[1:]))
                assert norms[-1] <= minimal_section_norm(g, x) + 1e-9

    def test_envelope_gradient_matches_yosida(self):
        rng = np.random.default_rng(13)
        step = 1e-6
        for _ in range(30):
            a, b = rng.uniform(0.1, 2.0, size=2)
            lam = rng.uniform(0.1, 2.0)
            fn = ConvexFunctionSpec(
                "poly",
                lambda x, a=a, b=b: float(np.sum(a * x**2 / 2 + b * x**4 / 4)),
                graph=PolyGraph(a, b),
            )
            T = SubdifferentialOperator(fn)
            dim = int(rng.integers(1, 4))
            x = 2.0 * rng.standard_normal(dim)
            grad = yosida(T, lam, x)
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = step
                fd = (
                    moreau_envelope(fn, lam, x + e) - moreau_envelope(fn, lam, x - e)
                ) / (2 * step)
                assert fd == pytest.approx(grad[i], rel=1e-5, abs=1e-8)

    def test_quadratic_functional_consistency(self):
        rng = np.random.default_rng(14)
        M = random_psd_matrix(rng, 6)
        sub = SubdifferentialOperator(quadratic(M))
        lin = LinearOperator(M)
        for lam in (0.2, 1.0, 5.0):
            w = rng.standard_normal(6)
            assert np.linalg.norm(
                resolvent(sub, lam, w) - resolvent(lin, lam, w)
            ) <= 1e-9


class TestConvexSpecs:
    def test_convexity_sampling(self):
        rng = np.random.default_rng(15)
        for fn in (abs_function(), half_square(), power4()):
            for _ in range(200):
                x, y = rng.uniform(-3, 3, size=2)
                t = rng.uniform()
                mid = fn.value([t * x + (1 - t) * y])
                assert mid <= t * fn.value([x]) + (1 - t) * fn.value([y]) + 1e-10

    def test_power4_prox_solves_stationarity(self):
        fn = power4()
        w = np.array([2.0, -5.0, 0.1])
        lam = 0.7
        p = fn.prox(lam, w)
        assert np.max(np.abs(4 * lam * p**3 + p - w)) <= 1e-9

    def test_sum_spec_prox_matches_grid_oracle(self):
        fn = abs_function().add(half_square())
        for w in (-2.0, 0.3, 4.0):
            p = fn.prox(1.0, np.array([w]))[0]
            assert p == pytest.approx(
                prox_grid_search(lambda v: abs(v) + v * v / 2, 1.0, w), abs=1e-4
            )

    def test_mixed_sum_rejected(self):
        rng = np.random.default_rng(16)
        with pytest.raises(ConfigurationError):
            quadratic(random_psd_matrix(rng, 3)).add(abs_function())

    def test_scaled_value_and_prox(self):
        fn = abs_function().scaled(2.0)
        assert fn.value([-3.0]) == 6.0
        # prox of 2|.| at lam: soft threshold at 2*lam
        assert fn.prox(0.5, np.array([3.0]))[0] == pytest.approx(2.0, abs=1e-12)
