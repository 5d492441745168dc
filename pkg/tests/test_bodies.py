import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nwidths import bodies as bd
from nwidths.errors import DimensionMismatchError, EnumerationCapError

EXP_GRID = ["1", "1.5", "2", "3", "inf"]


class TestLpNorm:
    @pytest.mark.parametrize("x,p,expected", [
        ((3, 4), 2, 5.0),
        ((1, 1, 1, 1), "inf", 1.0),
        ((1, -1, 1), 1, 3.0),
    ])
    def test_examples(self, x, p, expected):
        assert bd.lp_norm(x, p) == pytest.approx(expected, rel=1e-15)

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
    def test_nonincreasing_in_p(self, xs):
        x = np.array(xs)
        ps = [1, 1.5, 2, 4, "inf"]
        vals = [bd.lp_norm(x, p) for p in ps]
        for a, b in zip(vals, vals[1:]):
            assert b <= a + 1e-9 * (1 + a)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((20, 5))
        for p in EXP_GRID:
            rows = bd.lp_norms(X, p)
            for i in range(20):
                assert rows[i] == pytest.approx(bd.lp_norm(X[i], p), rel=1e-12)


class TestGauge:
    def test_intersection_example(self):
        body = bd.Intersection("inf", 1, 3.0, 9)
        assert bd.gauge(body, np.ones(9)) == pytest.approx(3.0)

    def test_vk_example(self):
        body = bd.VkPolytope(2, 3)
        assert bd.gauge(body, np.array([1.0, 1.0, 1.0])) == pytest.approx(1.5)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            bd.gauge(bd.Ball(2, 3), np.ones(4))

    def test_v1_is_l1_and_vm_is_linf(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.standard_normal(5)
            assert bd.gauge(bd.VkPolytope(1, 5), x) == pytest.approx(
                bd.lp_norm(x, 1), rel=1e-14)
            assert bd.gauge(bd.VkPolytope(5, 5), x) == pytest.approx(
                bd.lp_norm(x, "inf"), rel=1e-14)

    @given(st.lists(st.floats(-5, 5), min_size=4, max_size=4),
           st.floats(-3, 3))
    @settings(max_examples=60)
    def test_homogeneity(self, xs, t):
        x = np.array(xs)
        for body in (bd.Ball(1.5, 4), bd.Intersection(3, 1, 2.0, 4),
                     bd.VkPolytope(2, 4), bd.ScaledCube(2.0, 4)):
            g1 = bd.gauge(body, t * x)
            g2 = abs(t) * bd.gauge(body, x)
            assert g1 == pytest.approx(g2, rel=1e-9, abs=1e-12)

    def test_intersection_dominates_constituents(self):
        rng = np.random.default_rng(1)
        body = bd.Intersection(4, 1.5, 2.0, 6)
        for _ in range(30):
            x = rng.standard_normal(6)
            g = bd.gauge(body, x)
            assert g >= bd.lp_norm(x, 4) - 1e-12
            assert g >= bd.lp_norm(x, 1.5) / 2.0 - 1e-12
            assert g == pytest.approx(
                max(bd.lp_norm(x, 4), bd.lp_norm(x, 1.5) / 2.0), rel=1e-14)

    def test_noninteger_k_needs_flag(self):
        with pytest.raises(ValueError):
            bd.VkPolytope(2.5, 4)
        body = bd.VkPolytope(2.5, 4, extrapolated=True)
        assert bd.gauge(body, np.ones(4)) == pytest.approx(4 / 2.5)


class TestSupport:
    def test_vk_example(self):
        # oracle: maximum of <v, y> over the explicit vertex list
        body = bd.VkPolytope(2, 3)
        y = np.array([3.0, -2.0, 1.0])
        oracle = float(np.max(bd.vk_vertices(3, 2) @ y))
        assert oracle == 5.0
        assert bd.support(body, y) == pytest.approx(5.0, rel=1e-15)

    def test_ball_duality(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal(6)
        assert bd.support(bd.Ball(1, 6), y) == pytest.approx(
            bd.lp_norm(y, "inf"))
        assert bd.support(bd.Ball("inf", 6), y) == pytest.approx(
            bd.lp_norm(y, 1))
        assert bd.support(bd.Ball(2, 6), y) == pytest.approx(
            bd.lp_norm(y, 2))

    def test_scaled_cube(self):
        assert bd.support(bd.ScaledCube(2.0, 2), np.ones(2)) == 4.0

    def test_support_vs_vertices_all_small(self):
        rng = np.random.default_rng(4)
        for m in range(2, 7):
            for k in range(1, m + 1):
                V = bd.vk_vertices(m, k)
                body = bd.VkPolytope(k, m)
                for _ in range(10):
                    y = rng.standard_normal(m)
                    assert bd.support(body, y) == pytest.approx(
                        float((V @ y).max()), rel=1e-12)

    def test_intersection_support_cube_cross_exact(self):
        body = bd.Intersection("inf", 1, 3.0, 6)
        rng = np.random.default_rng(5)
        for _ in range(10):
            y = rng.standard_normal(6)
            a = np.sort(np.abs(y))[::-1]
            assert bd.support(body, y) == pytest.approx(a[:3].sum(),
                                                        rel=1e-12)

    def test_intersection_support_general_vs_scipy(self):
        from scipy.optimize import minimize

        body = bd.Intersection(3, 1.5, 2.0, 5)
        rng = np.random.default_rng(9)
        for _ in range(5):
            y = rng.standard_normal(5)
            cons = [
                {"type": "ineq",
                 "fun": lambda x: 1.0 - bd.lp_norm(x, 3)},
                {"type": "ineq",
                 "fun": lambda x: 1.0 - bd.lp_norm(x, 1.5) / body.nu},
            ]
            best = -np.inf
            for s in range(4):
                x0 = np.random.default_rng(s).standard_normal(5) * 0.1
                res = minimize(lambda x: -(x @ y), x0, constraints=cons,
                               method="SLSQP",
                               options={"maxiter": 400, "ftol": 1e-12})
                if res.success:
                    best = max(best, -res.fun)
            approx = bd.support(body, y)
            # the ascent is a lower estimate; it must land close to the
            # best the constrained solver can certify
            assert approx <= best * (1 + 1e-6) + 1e-9
            assert approx >= 0.98 * best

    def test_support_point_ball_achieves(self):
        rng = np.random.default_rng(6)
        for p in EXP_GRID:
            for _ in range(10):
                y = rng.standard_normal(5)
                x = bd.support_point_ball(p, y)
                assert bd.lp_norm(x, p) <= 1 + 1e-12
                assert float(x @ y) == pytest.approx(
                    bd.support(bd.Ball(p, 5), y), rel=1e-12)


class TestVkVertices:
    @pytest.mark.parametrize("m,k,count", [(3, 1, 6), (2, 2, 4), (5, 2, 40)])
    def test_counts(self, m, k, count):
        V = bd.vk_vertices(m, k)
        assert V.shape == (count, m)
        assert len({tuple(v) for v in V}) == count

    def test_base_pattern(self):
        x = bd.vk_base_pattern(6, 3)
        assert x.tolist() == [1, 1, 1, 0, 0, 0]
        # every vertex is a signed permutation of the base pattern
        V = bd.vk_vertices(6, 3)
        assert np.all(np.sort(np.abs(V), axis=1) == np.sort(x))

    def test_entries(self):
        V = bd.vk_vertices(5, 2)
        assert np.all(np.abs(V).sum(axis=1) == 2)
        assert np.all(np.abs(V).max(axis=1) == 1)

    def test_cap(self):
        with pytest.raises(EnumerationCapError):
            bd.vk_vertices(30, 15, cap=1000)

    def test_half_vertices_cover_by_sign(self):
        V = bd.body_vertices(bd.VkPolytope(2, 4), half=True)
        full = bd.vk_vertices(4, 2)
        got = {tuple(v) for v in V} | {tuple(-v) for v in V}
        assert got == {tuple(v) for v in full}
        assert V.shape[0] == full.shape[0] // 2


class TestHullGauge:
    def test_matches_formula_small(self):
        rng = np.random.default_rng(7)
        for m in range(2, 6):
            for k in range(1, m + 1):
                V = bd.vk_vertices(m, k)
                body = bd.VkPolytope(k, m)
                for _ in range(15):
                    x = rng.standard_normal(m)
                    assert bd.hull_gauge(V, x) == pytest.approx(
                        bd.gauge(body, x), rel=1e-9, abs=1e-12)

    def test_probe_duality(self):
        rng = np.random.default_rng(8)
        for m in range(2, 7):
            for k in range(1, m + 1):
                body = bd.VkPolytope(k, m)
                for _ in range(20):
                    x = rng.standard_normal(m)
                    assert bd.vk_gauge_probe(x, k) == pytest.approx(
                        bd.gauge(body, x), rel=1e-12)

    def test_zero_vector(self):
        assert bd.hull_gauge(bd.vk_vertices(3, 2), np.zeros(3)) == 0.0


class TestCertificates:
    def test_interpolation_spike_and_flat_equalities(self):
        # single-spike and all-ones vectors meet the bound with equality
        lam = 0.5
        x = np.zeros(4)
        x[0] = 1.0
        assert bd.lp_norm(x, 2) == 1.0
        ones = np.ones(4)
        lhs = bd.lp_norm(ones, 2)
        rhs = bd.lp_norm(ones, 1) ** (1 - lam) * bd.lp_norm(ones, "inf") ** lam
        assert lhs == pytest.approx(rhs, rel=1e-15)

    def test_interpolation_clean(self):
        rep = bd.cert_interpolation(1, 3, 2, m=8, samples=10000, seed=0)
        assert rep.ok and rep.checks == 10000
        assert rep.max_violation <= 1e-12

    def test_interpolation_negative_control(self):
        rep = bd.cert_interpolation(1, 3, 2, m=8, samples=1000, seed=0,
                                    lambda_shift=0.25)
        assert not rep.ok

    def test_vkl_examples(self):
        rep = bd.cert_vkl("inf", 1, 2, 3)
        assert rep.ok and rep.max_violation <= 1e-12
        rep = bd.cert_vkl(4, 2, 4, 6)
        assert rep.ok

    def test_cube_examples(self):
        rep = bd.cert_cube("inf", 1, 2, 4)
        assert rep.ok
        rep = bd.cert_cube(3, 1.5, 4, 4)
        assert rep.ok

    def test_grid_certificates(self):
        grid = ["1", "1.5", "2", "3", "inf"]
        for s1 in grid:
            for s0 in grid:
                p1, p0 = bd.as_exponent(s1), bd.as_exponent(s0)
                if not p1.inv > p0.inv:
                    continue
                for m in range(1, 7):
                    for k in range(1, m + 1):
                        assert bd.cert_vkl(s0, s1, k, m).ok, (s0, s1, k, m)
                        assert bd.cert_cube(s0, s1, k, m).ok, (s0, s1, k, m)
