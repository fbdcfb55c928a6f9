import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sps

from partisan_exposure.errors import DegenerateVarianceError, InfiniteVifError, ValidationError
from partisan_exposure.stats import (
    pearson_r,
    significance_stars,
    t_sf,
    t_test_pooled,
    t_test_welch,
    t_two_sided_p,
    vif,
)

samples = arrays(np.float64, st.integers(2, 30), elements=st.floats(-1e3, 1e3, allow_subnormal=False))


def varied(a):
    return np.ptp(a) > 1e-6 * max(1.0, np.abs(a).max())


class TestStudentT:
    @pytest.mark.parametrize("df", [1, 2, 4.5, 30, 3096, 1e6])
    @pytest.mark.parametrize("t", [0.0, 0.3, 1.96, 5.0, 20.3, 40.0])
    def test_two_sided(self, t, df):
        assert t_two_sided_p(t, df) == pytest.approx(2 * sps.t.sf(t, df), rel=1e-12)
        assert t_two_sided_p(-t, df) == t_two_sided_p(t, df)

    def test_tiny_p_not_flushed(self):
        # t of about 20 on three thousand df sits around 1e-85
        p = t_two_sided_p(20.31, 3096)
        assert 0 < p < 1e-80
        # 3.410969689031389e-86 from 50-digit incomplete beta
        assert p == pytest.approx(3.410969689031389e-86, rel=1e-12)

    def test_sf_symmetry(self):
        assert t_sf(-1.3, 7) == pytest.approx(1 - t_sf(1.3, 7), rel=1e-13)


class TestStars:
    @pytest.mark.parametrize("p,stars", [
        (2.19e-15, "***"), (0.0535, "ns"), (0.0009999, "***"), (0.001, "**"), (0.0099, "**"),
        (0.01, "*"), (0.049, "*"), (0.05, "ns"), (0.3219, "ns"), (0.023, "*"),
    ])
    def test_thresholds(self, p, stars):
        assert significance_stars(p) == stars


class TestPooled:
    def test_hand(self):
        r = t_test_pooled([1, 2, 3], [2, 4, 6])
        # means 2 and 4, pooled variance (2 * 1 + 2 * 4) / 4 = 5/2
        t = -2 / math.sqrt(Fraction(5, 2) * Fraction(2, 3))
        assert r.t_statistic == pytest.approx(t, abs=1e-9)
        assert r.df == 4
        assert r.p_value == pytest.approx(2 * sps.t.sf(abs(t), 4), abs=1e-9)

    def test_identical(self):
        r = t_test_pooled([1.0, 2.0, 5.0], [1.0, 2.0, 5.0])
        assert r.t_statistic == 0 and r.p_value == 1.0

    def test_degenerate(self):
        assert t_test_pooled([3.0, 3.0], [3.0, 3.0]).p_value == 1.0
        with pytest.raises(DegenerateVarianceError):
            t_test_pooled([3.0, 3.0], [4.0, 4.0])

    def test_too_small(self):
        with pytest.raises(ValidationError):
            t_test_pooled([1.0], [1.0, 2.0])

    @given(samples, samples, st.floats(-100, 100), st.floats(0.01, 100))
    @settings(max_examples=80)
    def test_shift_scale_invariance(self, a, b, c, s):
        if not (varied(a) or varied(b)):
            return
        r = t_test_pooled(a, b)
        swapped = t_test_pooled(b, a)
        assert swapped.t_statistic == pytest.approx(-r.t_statistic, rel=1e-9, abs=1e-9)
        assert swapped.p_value == pytest.approx(r.p_value, rel=1e-9, abs=1e-12)
        shifted = t_test_pooled(a + c, b + c)
        assert shifted.t_statistic == pytest.approx(r.t_statistic, rel=1e-6, abs=1e-6)
        scaled = t_test_pooled(a * s, b * s)
        assert scaled.t_statistic == pytest.approx(r.t_statistic, rel=1e-9, abs=1e-9)
        assert 0.0 <= r.p_value <= 1.0

    def test_matches_scipy(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(0, 1, 25), rng.normal(0.4, 1, 31)
        ref = sps.ttest_ind(a, b)
        r = t_test_pooled(a, b)
        assert r.t_statistic == pytest.approx(ref.statistic, rel=1e-12)
        assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)


class TestWelch:
    def test_hand(self):
        a, b = [1, 2, 3, 4], [10, 20, 30]
        va, vb = Fraction(5, 3) / 4, Fraction(100) / 3
        se2 = va + vb
        t = (Fraction(5, 2) - 20) / math.sqrt(se2)
        df = se2 ** 2 / (va ** 2 / 3 + vb ** 2 / 2)
        r = t_test_welch(a, b)
        assert r.t_statistic == pytest.approx(float(t), abs=1e-9)
        assert r.df == pytest.approx(float(df), abs=1e-9)
        assert r.p_value == pytest.approx(2 * sps.t.sf(abs(float(t)), float(df)), abs=1e-9)

    def test_reduces_to_pooled(self):
        a = np.array([1.0, 2.0, 4.0, 7.0])
        b = a + 1.5
        w, p = t_test_welch(a, b), t_test_pooled(a, b)
        assert w.t_statistic == pytest.approx(p.t_statistic, abs=1e-12)
        assert w.df <= p.df + 1e-12

    def test_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            t_test_welch([1.0, 1.0], [1.0, 2.0])

    def test_monotone_in_shift(self):
        a = np.array([1.0, 2.0, 3.5, 4.0])
        b = np.array([2.0, 2.5, 5.0])
        ts = [t_test_welch(a, b + c).t_statistic for c in np.linspace(-3, 3, 13)]
        assert all(x > y for x, y in zip(ts, ts[1:]))
        up, down = t_test_welch(a, b + 1), t_test_welch(a + 1, b)
        assert up.p_value == pytest.approx(t_test_welch(b + 1, a).p_value)
        assert down.t_statistic > 0 or down.p_value <= 1

    def test_matches_scipy(self):
        rng = np.random.default_rng(2)
        a, b = rng.normal(0, 1, 20), rng.normal(0.5, 3, 35)
        ref = sps.ttest_ind(a, b, equal_var=False)
        r = t_test_welch(a, b)
        assert r.t_statistic == pytest.approx(ref.statistic, rel=1e-12)
        assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)


class TestPearson:
    def test_values(self):
        x = np.array([1.0, 2.0, 3.0])
        assert pearson_r(x, x) == pytest.approx(1.0, abs=1e-15)
        assert pearson_r(x, -x) == pytest.approx(-1.0, abs=1e-15)
        assert pearson_r(x, [1, 2, 4]) == pytest.approx(0.9820, abs=1e-4)

    def test_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            pearson_r([1, 1, 1], [1, 2, 3])

    @given(samples, st.floats(0.1, 10), st.floats(-10, 10))
    @settings(max_examples=60)
    def test_affine(self, x, s, c):
        if not varied(x):
            return
        y = np.sin(x) + 0.3 * x
        if not varied(y):
            return
        r = pearson_r(x, y)
        assert pearson_r(s * x + c, y) == pytest.approx(r, abs=1e-9)
        assert pearson_r(-s * x + c, y) == pytest.approx(-r, abs=1e-9)


class TestVif:
    def test_orthogonal(self):
        n = 64
        t = np.arange(n) * 2 * np.pi / n
        v = vif(np.column_stack([np.sin(t), np.cos(t), np.sin(2 * t)]))
        np.testing.assert_allclose(list(v.values()), 1.0, atol=1e-12)

    def test_collinear(self):
        x = np.arange(10.0)
        with pytest.raises(InfiniteVifError, match="b"):
            vif(np.column_stack([x, x]), ["b", "c"])

    def test_r2_099(self):
        rng = np.random.default_rng(0)
        x1 = rng.standard_normal(500)
        noise = rng.standard_normal(500)
        # project noise off x1 so R2 of x2 on x1 is set exactly
        x1c = x1 - x1.mean()
        noise -= noise.mean()
        noise -= (noise @ x1c) / (x1c @ x1c) * x1c
        noise *= math.sqrt(0.01 / 0.99 * (x1c @ x1c) / (noise @ noise))
        v = vif(np.column_stack([x1, x1 + noise]))
        assert v["x1"] == pytest.approx(100.0, rel=1e-9)
        assert v["x0"] == pytest.approx(100.0, rel=1e-9)
