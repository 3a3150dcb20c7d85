"""
Tests for the centered-moment quantities.
"""

import unittest
from functools import lru_cache

import numpy as np
import pytest

from lowzero.numerics.kernels import get_kernel
from lowzero.numerics.moments import (
    MomentEngine,
    MomentSpec,
    big_r,
    big_s,
    double_factorial,
    mean_so_even,
    rhs_limit,
    s_coefficient,
    sigma_phi_sq,
)
from lowzero.numerics.quad import QuadConfig, integrate_1d
from lowzero.numerics.testfun import hat_integral, make_custom, make_naive, make_omega


class TestCombinatorics(unittest.TestCase):
    """Integer helpers."""

    def test_double_factorial(self):
        self.assertEqual(double_factorial(5), 15)
        self.assertEqual(double_factorial(6), 48)
        self.assertEqual(double_factorial(0), 1)
        self.assertEqual(double_factorial(-1), 1)
        with pytest.raises(ValueError):
            double_factorial(-2)

    def test_s_coefficient(self):
        self.assertEqual(s_coefficient(4, 1), 12)
        self.assertEqual(s_coefficient(6, 2), 180)
        self.assertEqual(s_coefficient(3, 0), 1)


class TestMomentSpec(unittest.TestCase):
    """Parameter validation."""

    def test_defaults(self):
        spec = MomentSpec(n=4)
        self.assertEqual(spec.a, 4)
        self.assertEqual(spec.sign, 1)
        self.assertEqual(spec.sigma, 2.0)
        self.assertEqual(spec.support_status, "GRH-proven range")
        self.assertEqual(MomentSpec(n=2, sigma=3.0).support_status, "conjectural")

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            MomentSpec(n=0)
        with pytest.raises(ValueError):
            MomentSpec(n=2, a=0)
        with pytest.raises(ValueError):
            MomentSpec(n=2, sign=0)
        with pytest.raises(ValueError):
            MomentSpec(n=2, sigma=0.0)


class TestSigmaPhiSq(unittest.TestCase):
    """The variance term."""

    def setUp(self):
        self.cfg = QuadConfig()

    def test_naive_variance_is_one_third(self):
        for sigma in (2.0, 1.0, 2.0 / 3.0, 0.5, 1.0 / 3.0):
            value = sigma_phi_sq(make_naive(sigma), self.cfg)
            self.assertAlmostEqual(value, 1.0 / 3.0, delta=1e-6)

    def test_zero_function(self):
        tf = make_custom(
            lambda x: 0.0 * np.asarray(x), lambda y: 0.0 * np.asarray(y), 1.0
        )
        self.assertEqual(sigma_phi_sq(tf, self.cfg), 0.0)

    def test_omega_grid_route_matches_direct_integral(self):
        cfg = self.cfg.with_points(8001)
        tf = make_omega(get_kernel("cos"), 2.0, 1, 0.25, cfg)
        direct, _ = integrate_1d(
            lambda y: y * tf.phi_hat(y) ** 2, 0.0, tf.hat_support_radius, cfg
        )
        self.assertAlmostEqual(sigma_phi_sq(tf, cfg), 4.0 * direct, delta=1e-6)


class TestBigR(unittest.TestCase):
    """R(m, i; phi)."""

    def setUp(self):
        self.cfg = QuadConfig()

    def test_empty_sum(self):
        self.assertEqual(big_r(3, 0, make_naive(1.0), self.cfg), 0.0)

    def test_naive_single_term(self):
        # -phi(0)/2 + (1/2) * integral of phi_hat over [-1, 1]
        value = big_r(1, 1, make_naive(2.0), self.cfg)
        self.assertAlmostEqual(value, -0.125, delta=1e-6)
        self.assertAlmostEqual(big_r(1, 1, make_naive(1.0), self.cfg), 0.0, delta=1e-6)

    def test_omega_single_term(self):
        tf = make_omega(get_kernel("cos"), 2.0, 1, 0.25, self.cfg)
        expected = -0.5 * tf.phi(0.0) + tf.hat_values.integral(0.0, 1.0)
        self.assertAlmostEqual(big_r(1, 1, tf, self.cfg), expected, delta=1e-5)

    def test_rejects_bad_indices(self):
        tf = make_naive(1.0)
        with pytest.raises(ValueError):
            big_r(0, 1, tf, self.cfg)
        with pytest.raises(ValueError):
            big_r(1, -1, tf, self.cfg)
        with pytest.raises(ValueError):
            big_r(1, 3, tf, self.cfg)

    def test_engine_rejects_unknown_route(self):
        engine = MomentEngine(make_naive(1.0), self.cfg)
        with pytest.raises(ValueError):
            engine.outer(2, 1, route="monte-carlo")


@lru_cache(maxsize=None)
def _naive_engine():
    return MomentEngine(make_naive(1.0), QuadConfig())


@pytest.mark.parametrize(
    "m,i", [(m, i) for m in range(1, 7) for i in range(1, 4) if i - 1 <= m]
)
def test_reduction_matches_tensor_oracle(m, i):
    engine = _naive_engine()
    fast = big_r(m, i, engine.tf, engine.cfg, route="reduction", engine=engine)
    slow = big_r(m, i, engine.tf, engine.cfg, route="tensor", engine=engine)
    # The 2^(m-1) prefactor scales quadrature error with |R|.
    assert fast == pytest.approx(slow, abs=1e-4 * max(1.0, abs(slow))), f"R({m}, {i})"


class TestBigSAndLimits(unittest.TestCase):
    """S(n, a; phi) and the limiting centered moments."""

    def setUp(self):
        self.cfg = QuadConfig()
        self.tf = make_naive(1.0)
        self.engine = MomentEngine(self.tf, self.cfg)

    def test_single_term_cases_equal_big_r(self):
        for n in (1, 2, 3):
            self.assertEqual(
                big_s(n, 1, self.tf, self.cfg, engine=self.engine),
                big_r(n, 1, self.tf, self.cfg, engine=self.engine),
            )
        omega = make_omega(get_kernel("cos"), 2.0, 1, 0.25, self.cfg)
        self.assertEqual(big_s(1, 1, omega, self.cfg), big_r(1, 1, omega, self.cfg))

    def test_two_level_value(self):
        for a in (2, 1):
            value = big_s(2, a, self.tf, self.cfg, engine=self.engine)
            self.assertAlmostEqual(value, 1.0 / 12.0, delta=1e-5)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            big_s(0, 1, self.tf, self.cfg)
        with pytest.raises(ValueError):
            big_s(2, 0, self.tf, self.cfg)

    def test_odd_limit_is_signed_big_s(self):
        tf = make_naive(2.0 / 3.0)
        engine = MomentEngine(tf, self.cfg)
        s_value = big_s(3, 3, tf, self.cfg, engine=engine)
        even = rhs_limit(MomentSpec(n=3), tf, self.cfg, engine=engine)
        odd = rhs_limit(MomentSpec(n=3, sign=-1), tf, self.cfg, engine=engine)
        self.assertEqual(even, s_value)
        self.assertEqual(odd, -s_value)

    def test_even_limits(self):
        second = rhs_limit(MomentSpec(n=2), self.tf, self.cfg, engine=self.engine)
        self.assertAlmostEqual(second, 1.0 / 3.0 + 1.0 / 12.0, delta=1e-5)

        tf = make_naive(0.5)
        engine = MomentEngine(tf, self.cfg)
        fourth = rhs_limit(MomentSpec(n=4), tf, self.cfg, engine=engine)
        expected = 3.0 * engine.sigma_sq ** 2 + big_s(4, 4, tf, self.cfg, engine=engine)
        self.assertAlmostEqual(fourth, expected, delta=1e-12)

    def test_quadrature_error_is_tracked(self):
        big_s(4, 4, self.tf, self.cfg, engine=self.engine)
        self.assertGreaterEqual(self.engine.quad_error, 0.0)
        self.assertLess(self.engine.quad_error, 1e-6)


class TestMean(unittest.TestCase):
    """Mean of the statistic over the even family."""

    def setUp(self):
        self.cfg = QuadConfig()

    def test_naive_means(self):
        self.assertAlmostEqual(mean_so_even(make_naive(1.0), self.cfg), 1.5, delta=1e-6)
        for n in (4, 6):
            value = mean_so_even(make_naive(2.0 / n), self.cfg)
            self.assertAlmostEqual(value, n / 2 + 0.5, delta=1e-6)

    def test_omega_mean(self):
        cfg = self.cfg.with_points(8001)
        tf = make_omega(get_kernel("quadratic"), 2.0, 1, 0.3, cfg)
        expected = tf.phi_hat(0.0) + 0.5 * tf.phi(0.0)
        self.assertAlmostEqual(mean_so_even(tf, cfg), expected, delta=1e-6)
        self.assertAlmostEqual(hat_integral(tf, cfg), tf.phi(0.0), delta=1e-6)


if __name__ == "__main__":
    unittest.main()
