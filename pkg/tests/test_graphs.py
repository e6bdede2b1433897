import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monosum.errors import ConfigurationError, DomainError
from monosum.graphs import (
    IntervalNormalConeGraph,
    PiecewiseLinearGraph,
    PolyGraph,
    SaturatingGraph,
    SmoothCallableGraph,
    SumGraph,
)

from oracles import prox_grid_search, scalar_graph_resolvent_bisect


def sign_graph():
    return PiecewiseLinearGraph([(0.0, -1.0, 1.0)])


class TestValidation:
    def test_decreasing_breakpoints_rejected(self):
        with pytest.raises(ConfigurationError):
            PiecewiseLinearGraph([(1.0, 0.0, 0.0), (0.0, 1.0, 1.0)])

    def test_nonmonotone_values_rejected(self):
        with pytest.raises(ConfigurationError):
            PiecewiseLinearGraph([(0.0, 0.0, 2.0), (1.0, 1.0, 1.0)])

    def test_negative_tail_slope_rejected(self):
        with pytest.raises(ConfigurationError):
            PiecewiseLinearGraph([(0.0, 0.0, 0.0)], left_slope=-1.0)

    def test_flipped_interval_rejected(self):
        with pytest.raises(ConfigurationError):
            PiecewiseLinearGraph([(0.0, 1.0, -1.0)])

    def test_negative_poly_coeff_rejected(self):
        with pytest.raises(ConfigurationError):
            PolyGraph(-1.0)

    def test_overflowing_interior_slope_rejected(self):
        with pytest.raises(ConfigurationError):
            PiecewiseLinearGraph([(0.0, 0.0, 0.0), (5e-324, 1.0, 1.0)])

    def test_decreasing_callable_rejected(self):
        with pytest.raises(ConfigurationError):
            SmoothCallableGraph(lambda u: -u, lambda u: -np.ones_like(u))


class TestValuesAndSections:
    def test_sign_graph_interval_at_zero(self):
        assert sign_graph().value_interval(0.0) == (-1.0, 1.0)

    def test_sign_graph_sections(self):
        g = sign_graph()
        assert g.minimal_section(0.0) == 0.0
        assert g.minimal_section(2.0) == 1.0
        assert g.minimal_section(-0.5) == 1.0

    def test_cubic_section_single_valued(self):
        assert PolyGraph(0.0, 1.0).minimal_section(2.0) == 8.0

    def test_interval_domain_error(self):
        g = IntervalNormalConeGraph(0.0, 1.0)
        with pytest.raises(DomainError):
            g.minimal_section(2.0)
        assert g.minimal_section(0.0) == 0.0
        assert g.minimal_section(0.5) == 0.0

    def test_normalization_probe(self):
        assert sign_graph().contains_zero_at_zero()
        assert not PiecewiseLinearGraph([(0.0, 2.0, 3.0)]).contains_zero_at_zero()


class TestResolvents:
    def test_sign_graph_examples(self):
        g = sign_graph()
        u, y, s = g.resolve(0.5, np.array([2.0, 0.2]))
        # verified against the grid-minimization oracle below
        assert u == pytest.approx([1.5, 0.0], abs=1e-12)
        oracle = [prox_grid_search(abs, 0.5, w) for w in (2.0, 0.2)]
        assert u == pytest.approx(oracle, abs=1e-4)
        assert y == pytest.approx([1.0, 0.4], abs=1e-12)

    def test_resolvent_inclusion_identity(self):
        rng = np.random.default_rng(7)
        for g in (sign_graph(), PolyGraph(0.5, 2.0), SaturatingGraph()):
            for lam in (0.01, 0.7, 3.0):
                w = 5.0 * rng.standard_normal(64)
                u, y, _ = g.resolve(lam, w)
                assert np.max(np.abs(u + lam * y - w)) <= 1e-10
                lo, hi = g.value_bounds(u)
                assert np.all(y >= lo - 1e-9) and np.all(y <= hi + 1e-9)

    def test_interval_projection(self):
        g = IntervalNormalConeGraph(0.0, math.inf)
        u, y, _ = g.resolve(2.0, np.array([-3.0, 4.0]))
        assert u == pytest.approx([0.0, 4.0])
        assert y == pytest.approx([-1.5, 0.0])

    def test_cubic_matches_plain_bisection_oracle(self):
        g = PolyGraph(0.0, 1.0)
        for lam in (0.3, 1.0):
            for w in (-2.5, 0.1, 7.0):
                u = g.resolve(lam, np.array([w]))[0][0]
                fn = lambda v: v**3
                expected = scalar_graph_resolvent_bisect(fn, fn, lam, w)
                assert u == pytest.approx(expected, abs=1e-10)

    def test_scaled_graph_consistency(self):
        g = PolyGraph(0.0, 1.0)
        rng = np.random.default_rng(5)
        w = rng.standard_normal(16)
        u1, y1, _ = g.scaled(2.5).resolve(0.4, w)
        u2, y2, _ = PolyGraph(0.0, 2.5).resolve(0.4, w)
        assert np.allclose(u1, u2, atol=1e-12)
        assert np.allclose(y1, y2, atol=1e-12)

    def test_scaling_normal_cone_is_identity(self):
        g = IntervalNormalConeGraph(0.0, 1.0)
        assert g.scaled(7.0) is g


@st.composite
def monotone_pl_graph(draw):
    m = draw(st.integers(1, 4))
    # quantized abscissae keep interior slopes representable
    xs = sorted(
        draw(
            st.lists(
                st.integers(-3000, 3000).map(lambda k: k / 1000.0),
                min_size=m,
                max_size=m,
                unique=True,
            )
        )
    )
    ys = sorted(draw(st.lists(st.floats(-4, 4), min_size=2 * m, max_size=2 * m)))
    pts = [(xs[i], ys[2 * i], ys[2 * i + 1]) for i in range(m)]
    left = draw(st.floats(0, 3))
    right = draw(st.floats(0, 3))
    return PiecewiseLinearGraph(pts, left, right)


class TestPiecewiseLinearProperty:
    @settings(max_examples=150, deadline=None)
    @given(
        g=monotone_pl_graph(),
        lam=st.floats(1e-3, 10.0),
        w=st.floats(-20.0, 20.0),
    )
    def test_matches_bisection_oracle(self, g, lam, w):
        u = g.resolve(lam, np.array([w]))[0][0]

        def g_lo(x):
            return g.value_bounds(np.array([x]))[0][0]

        def g_hi(x):
            return g.value_bounds(np.array([x]))[1][0]

        expected = scalar_graph_resolvent_bisect(g_lo, g_hi, lam, w)
        assert u == pytest.approx(expected, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(
        g=monotone_pl_graph(),
        lam=st.floats(1e-3, 10.0),
        w1=st.floats(-20.0, 20.0),
        w2=st.floats(-20.0, 20.0),
    )
    def test_resolvent_monotone_and_nonexpansive(self, g, lam, w1, w2):
        u1 = g.resolve(lam, np.array([w1]))[0][0]
        u2 = g.resolve(lam, np.array([w2]))[0][0]
        assert (u1 - u2) * (w1 - w2) >= -1e-12
        assert abs(u1 - u2) <= abs(w1 - w2) + 1e-9


class TestSumGraph:
    def test_sign_plus_linear_matches_grid_oracle(self):
        g = SumGraph(sign_graph(), PolyGraph(1.0))
        for lam in (0.5, 1.0):
            for w in (-3.0, -0.4, 0.2, 2.0):
                u = g.resolve(lam, np.array([w]))[0][0]
                expected = prox_grid_search(lambda v: abs(v) + 0.5 * v * v, lam, w)
                assert u == pytest.approx(expected, abs=1e-4)
                closed = np.sign(w) * max(abs(w) - lam, 0.0) / (1.0 + lam)
                assert u == pytest.approx(closed, abs=1e-9)

    def test_two_normal_cones_intersect(self):
        g = SumGraph(IntervalNormalConeGraph(0.0, math.inf), IntervalNormalConeGraph(-1.0, 1.0))
        u, _, _ = g.resolve(1.0, np.array([-2.0, 0.5, 3.0]))
        assert u == pytest.approx([0.0, 0.5, 1.0], abs=1e-9)

    def test_disjoint_domains_rejected(self):
        with pytest.raises(ConfigurationError):
            SumGraph(IntervalNormalConeGraph(0.0, 1.0), IntervalNormalConeGraph(2.0, 3.0))

    def test_monotone_sampling_on_presets(self):
        rng = np.random.default_rng(11)
        graphs = [
            sign_graph(),
            PolyGraph(0.3, 1.0, 0.2),
            SaturatingGraph(),
            SumGraph(sign_graph(), PolyGraph(1.0)),
        ]
        for g in graphs:
            x = rng.uniform(-5, 5, size=1000)
            lo, hi = g.value_bounds(np.sort(x))
            # any selection respects monotonicity when hi is nondecreasing
            # against the next lo
            assert np.all(hi[:-1] <= lo[1:] + 1e-12)
