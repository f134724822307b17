import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisestab.errors import CorrelationOutOfRange, DegenerateProbability, DegreeTooLarge
from noisestab.gaussian_core import (
    HERMITE_MAX_DEGREE,
    bvn_rectangle,
    bvn_upper,
    hermite_eval,
    hermite_eval_normalized,
    hermite_weighted_table,
    isoperimetric_profile,
    profile_derivative,
    profile_second_derivative,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    xi,
)

import oracles

INV_SQRT_2PI = 0.3989422804014327


class TestCdfPdfQuantile:
    def test_cdf_fixed_points(self):
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(math.inf) == 1.0
        assert std_normal_cdf(-math.inf) == 0.0

    def test_cdf_at_one_matches_trapezoid(self):
        assert abs(std_normal_cdf(1.0) - oracles.trapezoid_cdf(1.0)) <= 1e-12

    def test_cdf_deep_tail_relative(self):
        ref = float(mp.ncdf(-30))
        assert abs(std_normal_cdf(-30.0) / ref - 1) < 1e-13

    def test_cdf_vectorized(self):
        out = std_normal_cdf(np.array([-1.0, 0.0, 1.0]))
        assert out.shape == (3,)
        assert out[1] == 0.5

    def test_pdf(self):
        assert std_normal_pdf(0.0) == pytest.approx(INV_SQRT_2PI, abs=1e-16)
        assert std_normal_pdf(math.inf) == 0.0
        assert std_normal_pdf(-math.inf) == 0.0
        series = sum((-2.0) ** k / math.factorial(k) for k in range(40)) / math.sqrt(2 * math.pi)
        assert std_normal_pdf(2.0) == pytest.approx(series, rel=1e-14)

    def test_quantile_fixed_points(self):
        assert std_normal_quantile(0.5) == 0.0
        assert abs(std_normal_quantile(std_normal_cdf(1.23)) - 1.23) <= 1e-12

    def test_quantile_matches_bisection(self):
        assert abs(std_normal_quantile(0.75) - oracles.bisection_quantile(0.75)) <= 1e-12

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_quantile_degenerate(self, p):
        with pytest.raises(DegenerateProbability):
            std_normal_quantile(p)

    def test_quantile_reflection_symmetry(self):
        # dyadic p keeps 1 - p exact
        p = np.arange(1, 2 ** 10) / 2.0 ** 11
        np.testing.assert_array_equal(std_normal_quantile(p), -std_normal_quantile(1 - p))

    def test_quantile_tiny_p_against_mpmath(self):
        for p in (1e-300, 1e-100, 1e-20, 1e-5):
            with mp.workdps(40):
                ref = float(mp.findroot(lambda x: mp.log(mp.ncdf(x)) - mp.log(p),
                                        -math.sqrt(-2 * math.log(p))))
            assert std_normal_quantile(p) == pytest.approx(ref, rel=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=1e-300, max_value=1 - 1e-16, exclude_min=False))
    def test_round_trip_property(self, p):
        assert abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-13


class TestProfile:
    def test_values(self):
        assert isoperimetric_profile(0.5) == pytest.approx(INV_SQRT_2PI, abs=1e-16)
        assert isoperimetric_profile(0.0) == 0.0
        assert isoperimetric_profile(1.0) == 0.0

    def test_profile_at_point_one_matches_defining_integral(self):
        a = oracles.bisection_quantile(0.1)
        ref = -oracles.mp_gauss_integral(lambda x: x, -math.inf, a)
        assert abs(isoperimetric_profile(0.1) - ref) <= 1e-10

    def test_symmetry(self):
        s = np.linspace(0.01, 0.99, 99)
        np.testing.assert_allclose(isoperimetric_profile(s), isoperimetric_profile(1 - s), rtol=1e-14)

    def test_derivative(self):
        assert profile_derivative(0.5) == 0.0
        assert profile_derivative(0.2) == pytest.approx(-profile_derivative(0.8), rel=1e-13)
        h = 1e-6
        fd = (isoperimetric_profile(0.3 + h) - isoperimetric_profile(0.3 - h)) / (2 * h)
        assert abs(profile_derivative(0.3) - fd) <= 1e-6

    def test_second_derivative(self):
        assert profile_second_derivative(0.5) == pytest.approx(-math.sqrt(2 * math.pi), abs=1e-10)
        s = np.linspace(0.001, 0.999, 500)
        assert np.all(profile_second_derivative(s) < -2)
        h = 1e-4
        q = isoperimetric_profile
        fd = (q(0.25 + h) - 2 * q(0.25) + q(0.25 - h)) / h ** 2
        assert abs(profile_second_derivative(0.25) - fd) <= 1e-4

    @pytest.mark.parametrize("fn", [profile_derivative, profile_second_derivative, xi])
    @pytest.mark.parametrize("s", [0.0, 1.0])
    def test_endpoints_raise(self, fn, s):
        with pytest.raises(DegenerateProbability):
            fn(s)

    def test_xi(self):
        assert xi(0.5) == 0.0
        assert xi(0.2) == pytest.approx(-xi(0.8), rel=1e-13)
        a = oracles.bisection_quantile(0.2)
        ref = oracles.mp_gauss_integral(lambda u: u * u - 1, -math.inf, a)
        assert abs(xi(0.2) - ref) <= 1e-10


class TestBivariate:
    def test_full_plane(self):
        for r in (-0.9, 0.0, 0.5, 0.999):
            assert bvn_rectangle(-math.inf, math.inf, -math.inf, math.inf, r) == pytest.approx(1.0, abs=1e-15)

    def test_independence(self):
        got = bvn_rectangle(-0.3, 1.1, 0.2, 2.0, 0.0)
        ref = (std_normal_cdf(1.1) - std_normal_cdf(-0.3)) * (std_normal_cdf(2.0) - std_normal_cdf(0.2))
        assert got == pytest.approx(ref, abs=1e-15)

    def test_quadrant_tensor_oracle(self):
        ref = oracles.tensor_quadrant(0.5)
        assert abs(bvn_rectangle(0.0, math.inf, 0.0, math.inf, 0.5) - ref) <= 1e-10
        assert abs(ref - 1 / 3) <= 1e-12

    def test_rho_out_of_range(self):
        with pytest.raises(CorrelationOutOfRange):
            bvn_upper(0.0, 0.0, 1.0)
        with pytest.raises(CorrelationOutOfRange):
            bvn_rectangle(0, 1, 0, 1, -1.2)

    @pytest.mark.parametrize("h,k,r", [
        (0.3, -0.4, 0.2), (1.5, 1.2, 0.8), (-2.0, 0.5, -0.6), (0.1, 0.1, 0.95),
        (-1.0, -1.2, 0.99), (2.5, -2.5, -0.97), (0.0, 3.0, 0.5), (-4.0, -4.0, 0.93),
    ])
    def test_against_mpmath(self, h, k, r):
        # P(X > h, Y > k) = P(X < -h, Y < -k)
        ref = oracles.mp_bvn_lower(-h, -k, r)
        assert abs(bvn_upper(h, k, r) - ref) <= 1e-14

    def test_broadcasting(self):
        out = bvn_rectangle(np.array([[-1.0], [0.0]]), np.array([[1.0], [2.0]]),
                            np.array([[-1.0, 0.5]]), np.array([[1.0, 3.0]]), 0.4)
        assert out.shape == (2, 2)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-0.999, 0.999))
    def test_symmetry_in_arguments(self, h, k, r):
        assert bvn_upper(h, k, r) == pytest.approx(bvn_upper(k, h, r), abs=1e-15)


class TestHermite:
    def test_base_cases(self):
        assert hermite_eval(0, 1.7) == 1.0
        assert hermite_eval(1, 1.7) == 1.7
        assert hermite_eval(2, 3.0) == 8.0
        assert hermite_eval(3, 2.0) == 2.0

    def test_normalized(self):
        assert hermite_eval_normalized(3, 2.0) == pytest.approx(2.0 / math.sqrt(6))

    def test_guard(self):
        with pytest.raises(DegreeTooLarge):
            hermite_eval(HERMITE_MAX_DEGREE + 1, 0.0)

    def test_weighted_table_matches_mpmath(self):
        x = np.array([-3.0, 0.4, 6.0])
        tab = hermite_weighted_table(60, x)
        assert tab.shape == (61, 3)
        for ell in (0, 7, 33, 60):
            for j, xv in enumerate(x):
                ref = mp.hermite(ell, xv / mp.sqrt(2)) * mp.power(2, -mp.mpf(ell) / 2) \
                    / mp.sqrt(mp.factorial(ell)) * mp.npdf(xv)
                assert tab[ell, j] == pytest.approx(float(ref), abs=1e-15, rel=1e-11)

    def test_weighted_table_infinite_points_vanish(self):
        tab = hermite_weighted_table(10, np.array([math.inf, -math.inf]))
        assert np.all(tab == 0)
