"""
Tests for the quadrature engine.
"""

import math
import unittest

import numpy as np
import pytest

from lowzero.errors import NumericalError
from lowzero.numerics.quad import (
    GridFunction,
    QuadConfig,
    abs_sum_density,
    abs_sum_densities,
    convolve_grid,
    integrate_1d,
    integrate_nd,
    sinc_inner,
    sinc_inner_plancherel,
    truncation_radius,
)
from lowzero.numerics.testfun import make_custom, make_naive


class TestQuadConfig(unittest.TestCase):
    """Validation and config loading."""

    def test_defaults(self):
        cfg = QuadConfig()
        self.assertEqual(cfg.rule, "trapezoid")
        self.assertEqual(cfg.points_per_dim, 4001)
        self.assertEqual(cfg.grid_points, 4001)
        self.assertEqual(cfg.with_points(2000).grid_points, 2001)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            QuadConfig(rule="simpson")
        with pytest.raises(ValueError):
            QuadConfig(points_per_dim=4)
        with pytest.raises(ValueError):
            QuadConfig(tolerance=0.0)
        with pytest.raises(ValueError):
            QuadConfig(x_radius=500.0)

    def test_from_config_with_overrides(self):
        config = {
            "quadrature": {
                "points_per_dim": 2001,
                "rule": "gauss-legendre",
                "unknown": 1,
            }
        }
        cfg = QuadConfig.from_config(config, rule=None, tolerance=1e-8)
        self.assertEqual(cfg.points_per_dim, 2001)
        self.assertEqual(cfg.rule, "gauss-legendre")
        self.assertEqual(cfg.tolerance, 1e-8)


class TestIntegrate1d(unittest.TestCase):
    """1-D rules on smooth integrands."""

    def test_polynomial_and_cosine(self):
        cfg = QuadConfig()
        value, _ = integrate_1d(lambda x: x, 0.0, 1.0, cfg)
        self.assertAlmostEqual(value, 0.5, places=12)
        value, _ = integrate_1d(lambda u: np.cos(0.5 * math.pi * u), 0.0, 1.0, cfg)
        self.assertAlmostEqual(value, 2.0 / math.pi, delta=1e-7)
        value, _ = integrate_1d(lambda u: 1.0 - u * u, -1.0, 1.0, cfg)
        self.assertAlmostEqual(value, 4.0 / 3.0, delta=1e-7)

    def test_every_rule(self):
        for rule in ("midpoint-riemann", "trapezoid", "gauss-legendre"):
            cfg = QuadConfig(rule=rule, points_per_dim=201)
            value, error = integrate_1d(np.exp, 0.0, 1.0, cfg)
            self.assertAlmostEqual(value, math.e - 1.0, delta=1e-5, msg=rule)
            self.assertGreaterEqual(error, 0.0)

    def test_constant_integrand_broadcasts(self):
        value, _ = integrate_1d(lambda x: 2.0, 0.0, 3.0, QuadConfig())
        self.assertAlmostEqual(value, 6.0, places=12)

    def test_trapezoid_is_second_order(self):
        errors = []
        for points in (9, 17, 33):
            cfg = QuadConfig(points_per_dim=points, refinement=0)
            value, _ = integrate_1d(np.exp, 0.0, 1.0, cfg)
            errors.append(abs(value - (math.e - 1.0)))
        self.assertAlmostEqual(errors[0] / errors[1], 4.0, delta=0.05)
        self.assertAlmostEqual(errors[1] / errors[2], 4.0, delta=0.05)

    def test_error_estimate_bounds_true_error(self):
        cfg = QuadConfig(points_per_dim=65)
        value, error = integrate_1d(np.exp, 0.0, 1.0, cfg)
        self.assertLess(abs(value - (math.e - 1.0)), 2 * error)

    def test_non_finite_integrand(self):
        with np.errstate(divide="ignore"):
            with pytest.raises(NumericalError, match="abscissa"):
                integrate_1d(lambda x: 1.0 / x, 0.0, 1.0, QuadConfig())

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            integrate_1d(np.exp, 1.0, 1.0, QuadConfig())
        with pytest.raises(ValueError):
            integrate_1d(np.exp, 2.0, 1.0, QuadConfig())


class TestIntegrateNd(unittest.TestCase):
    """Tensor-product oracle."""

    def test_unit_square_and_cube(self):
        cfg = QuadConfig(points_per_dim=201)
        value, _ = integrate_nd(
            lambda x, y: np.ones(np.broadcast(x, y).shape), [(0, 1), (0, 1)], cfg
        )
        self.assertAlmostEqual(value, 1.0, places=10)
        value, _ = integrate_nd(lambda x, y, z: x * y * z * 8.0, [(0, 1)] * 3, cfg)
        self.assertAlmostEqual(value, 1.0, places=10)

    def test_product_of_linear_terms(self):
        cfg = QuadConfig(points_per_dim=101)
        value, _ = integrate_nd(lambda x, y: x * y, [(0, 1), (0, 1)], cfg)
        self.assertAlmostEqual(value, 0.25, places=10)

    def test_dimension_limits(self):
        cfg = QuadConfig(points_per_dim=11)
        with pytest.raises(ValueError):
            integrate_nd(lambda *xs: 1.0, [(0, 1)] * 5, cfg)
        with pytest.raises(ValueError):
            integrate_nd(lambda *xs: 1.0, [], cfg)
        with pytest.raises(ValueError):
            integrate_nd(lambda x, y: x, [(0, 1), (1, 1)], cfg)

    def test_non_finite_integrand(self):
        cfg = QuadConfig(points_per_dim=11)
        with np.errstate(divide="ignore"):
            with pytest.raises(NumericalError):
                integrate_nd(lambda x, y: 1.0 / (x * y), [(0, 1), (0, 1)], cfg)


class TestConvolution(unittest.TestCase):
    """Discrete convolution of gridded functions."""

    def test_box_with_itself(self):
        box = GridFunction(-1.0, 1.0, np.ones(2001))
        tri = convolve_grid(box, box)
        self.assertAlmostEqual(tri.lo, -2.0)
        self.assertAlmostEqual(tri.hi, 2.0)
        self.assertEqual(tri.count, 4001)
        self.assertAlmostEqual(tri(0.0), 2.0, delta=1e-9)
        self.assertAlmostEqual(tri(1.0), 1.0, delta=1e-9)
        self.assertAlmostEqual(tri.integral(), 4.0, delta=1e-9)

    def test_zero_grid(self):
        zero = GridFunction.zeros(-1.0, 1.0, 101)
        box = GridFunction(-1.0, 1.0, np.ones(101))
        self.assertTrue(np.all(convolve_grid(zero, box).values == 0.0))

    def test_mismatched_steps(self):
        a = GridFunction(-1.0, 1.0, np.ones(101))
        b = GridFunction(-1.0, 1.0, np.ones(201))
        with pytest.raises(ValueError):
            convolve_grid(a, b)

    def test_cosine_autocorrelation_at_zero(self):
        # (f * f)(0) = integral of cos(pi y / 2)^2 over [-1, 1] = 1
        y = np.linspace(-1.0, 1.0, 4001)
        f = GridFunction(-1.0, 1.0, np.cos(0.5 * math.pi * y))
        self.assertAlmostEqual(convolve_grid(f, f)(0.0), 1.0, delta=1e-6)

    def test_non_finite_samples(self):
        with pytest.raises(NumericalError):
            GridFunction(0.0, 1.0, np.array([0.0, np.nan, 1.0]))

    def test_interpolation_is_zero_outside(self):
        g = GridFunction(-1.0, 1.0, np.ones(11))
        self.assertEqual(g(1.5), 0.0)
        self.assertEqual(g(0.3), 1.0)
        self.assertAlmostEqual(g.integral(-0.5, 2.0), 1.5)
        self.assertEqual(g.integral(2.0, 3.0), 0.0)


class TestAbsSumDensity(unittest.TestCase):
    """Densities of sums of absolute values."""

    def setUp(self):
        self.hat = make_naive(1.0).hat_grid(2001)

    def test_first_density(self):
        rho1 = abs_sum_density(self.hat, 1)
        t = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(rho1(t), 2.0 * (1.0 - t), atol=1e-12)

    def test_second_density_has_unit_mass(self):
        rho2 = abs_sum_density(self.hat, 2)
        self.assertAlmostEqual(rho2.lo, 0.0)
        self.assertAlmostEqual(rho2.hi, 2.0)
        self.assertAlmostEqual(rho2.integral(), 1.0, delta=1e-6)

    def test_density_matches_tensor_oracle(self):
        rho2 = abs_sum_densities(self.hat, 2)[1]
        via_density = GridFunction(rho2.lo, rho2.hi, rho2.values * rho2.x).integral()
        tf = make_naive(1.0)
        oracle, _ = integrate_nd(
            lambda x, y: tf.phi_hat(x) * tf.phi_hat(y) * (np.abs(x) + np.abs(y)),
            [(-1.0, 1.0), (-1.0, 1.0)],
            QuadConfig(points_per_dim=2001),
        )
        self.assertAlmostEqual(via_density, 2.0 / 3.0, delta=1e-5)
        self.assertAlmostEqual(via_density, oracle, delta=1e-5)

    def test_rejects_empty_product(self):
        with pytest.raises(ValueError):
            abs_sum_density(self.hat, 0)

    def test_rejects_asymmetric_grid(self):
        with pytest.raises(ValueError):
            abs_sum_density(GridFunction(0.0, 1.0, np.ones(11)), 1)


class TestSincInner(unittest.TestCase):
    """x-side oscillatory integrals."""

    def setUp(self):
        self.cfg = QuadConfig()

    def test_naive_values(self):
        for sigma, expected in ((2.0, 0.375), (0.5, 0.5)):
            tf = make_naive(sigma)
            value = sinc_inner(tf.phi, 1, 0.0, self.cfg, decay=tf.decay)
            self.assertAlmostEqual(value, expected, delta=1e-6)

    def test_fourier_side_agrees(self):
        tf = make_naive(2.0)
        x_side = sinc_inner(tf.phi, 1, 0.0, self.cfg, decay=tf.decay)
        y_side = sinc_inner_plancherel(tf.hat_grid(self.cfg.grid_points), 1, 0.0)
        self.assertAlmostEqual(y_side, 0.375, delta=1e-6)
        self.assertAlmostEqual(x_side, y_side, delta=1e-5)

    def test_shift_past_the_support(self):
        # 1 + t beyond the support of phi_hat picks up the whole mass.
        tf = make_naive(1.0)
        value = sinc_inner(tf.phi, 1, 0.5, self.cfg, decay=tf.decay)
        self.assertAlmostEqual(value, 0.5, delta=1e-6)

    def test_zero_function(self):
        tf = make_custom(
            lambda x: np.zeros_like(np.asarray(x, dtype=float)), lambda y: 0.0 * y, 1.0
        )
        self.assertEqual(sinc_inner(tf.phi, 1, 0.0, self.cfg), 0.0)

    def test_rejects_bad_arguments(self):
        tf = make_naive(1.0)
        with pytest.raises(ValueError):
            sinc_inner(tf.phi, 1, -0.1, self.cfg)
        with pytest.raises(ValueError):
            sinc_inner(tf.phi, 0, 0.0, self.cfg)

    def test_truncation_radius_is_clipped(self):
        cfg = QuadConfig()
        self.assertEqual(truncation_radius(0.0, 1, cfg), cfg.x_radius)
        self.assertEqual(truncation_radius(1e12, 1, cfg), cfg.x_radius_max)
        self.assertGreaterEqual(truncation_radius(1.0, 1, cfg), cfg.x_radius)


if __name__ == "__main__":
    unittest.main()
