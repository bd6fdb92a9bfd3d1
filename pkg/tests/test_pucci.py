import math
import unittest

import numpy as np

from cusplab.errors import AlignmentError, ParameterError
from cusplab.lattice import GridFunction, Lattice, ball
from cusplab.pucci import EllipticityParams, HypothesisReport, OperatorValue, certification_levels, \
    check_subsolution, check_supersolution, check_two_sided, guard_band, linear_operator_sandwich, m_minus, \
    m_plus, scale_transform


def half_square(sign):
    def func(points):
        return sign * 0.5 * np.sum(points * points, axis=-1)
    return func


def random_symmetric(rng, d):
    a = rng.normal(size=(d, d))
    return 0.5 * (a + a.T)


class OperatorTestCase(unittest.TestCase):
    def test_params(self):
        with self.assertRaises(ParameterError):
            EllipticityParams(2.0, 1.0)
        with self.assertRaises(ParameterError):
            EllipticityParams(1.0, 1.0, -0.1)
        params = EllipticityParams(1.0, 2.0, 0.5)
        self.assertEqual(params.with_gamma(0.1), EllipticityParams(1.0, 2.0, 0.1))

    def test_m_plus_values(self):
        params = EllipticityParams(1.0, 2.0, 1.0)
        self.assertAlmostEqual(m_plus(np.zeros((2, 2)), [3.0, 4.0], params).value, 10.0)
        self.assertAlmostEqual(m_plus(np.diag([1.0, -1.0]), [1.0, -1.0], params).value, 1.0 + 2.0 * math.sqrt(2.0))
        self.assertEqual(m_plus(np.eye(2), [0.5, 0.0], params), OperatorValue.plus_infinity())

    def test_m_minus_values(self):
        self.assertAlmostEqual(m_minus(np.eye(2), [1.0, 0.0], EllipticityParams(1.0, 1.0, 0.5)).value, 1.0)
        value = m_minus(np.diag([1.0, -1.0]), [1.0, -1.0], EllipticityParams(1.0, 2.0, 1.0))
        self.assertAlmostEqual(value.value, -1.0 - 2.0 * math.sqrt(2.0))
        below = m_minus(np.eye(2), [0.1, 0.0], EllipticityParams(1.0, 1.0, 0.5))
        self.assertEqual(below.tag, OperatorValue.MINUS_INFINITY)
        self.assertTrue(below.at_most(-1e300))
        self.assertFalse(below.at_least(-1e300))

    def test_operator_value(self):
        with self.assertRaises(ParameterError):
            OperatorValue(OperatorValue.FINITE)
        self.assertFalse(OperatorValue.plus_infinity().at_most(1e300))
        self.assertTrue(OperatorValue.finite(1.0).at_most(1.0))
        self.assertTrue(OperatorValue.finite(1.0).is_finite)

    def test_ordering_homogeneity_and_monotonicity(self):
        rng = np.random.default_rng(11)
        params = EllipticityParams(0.5, 3.0, 0.2)
        for _ in range(500):
            X = random_symmetric(rng, 3)
            g = rng.normal(size=3)
            g *= (0.2 + rng.uniform(0.0, 2.0)) / np.linalg.norm(g)
            lo = m_minus(X, g, params).value
            hi = m_plus(X, g, params).value
            self.assertLess(lo, hi)

            t = 1.0 + rng.uniform(0.0, 3.0)
            self.assertAlmostEqual(m_minus(t * X, t * g, params).value, t * lo, delta=1e-9 * (1.0 + abs(t * lo)))
            self.assertAlmostEqual(m_plus(t * X, t * g, params).value, t * hi, delta=1e-9 * (1.0 + abs(t * hi)))

            root = rng.normal(size=(3, 3))
            Y = X + root.dot(root.T)
            self.assertLessEqual(lo, m_minus(Y, g, params).value + 1e-9)
            self.assertLessEqual(hi, m_plus(Y, g, params).value + 1e-9)

    def test_linear_operator_sandwich(self):
        rng = np.random.default_rng(5)
        params = EllipticityParams(1.0, 2.0, 0.3)
        for _ in range(10000):
            q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
            A = q.dot(np.diag(rng.uniform(1.0, 2.0, size=2))).dot(q.T)
            A = 0.5 * (A + A.T)
            b = rng.normal(size=2)
            b *= rng.uniform(0.0, 2.0) / np.linalg.norm(b)
            grad = rng.normal(size=2)
            grad *= rng.uniform(0.3, 5.0) / np.linalg.norm(grad)
            self.assertTrue(linear_operator_sandwich(random_symmetric(rng, 2), grad, params, A, b))
        self.assertTrue(linear_operator_sandwich(np.zeros((2, 2)), [1.0, 0.0], params, np.eye(2), [0.0, 2.0]))
        with self.assertRaises(ParameterError):
            linear_operator_sandwich(np.eye(2), [1.0, 0.0], params, 3.0 * np.eye(2), [0.0, 0.0])
        with self.assertRaises(ParameterError):
            linear_operator_sandwich(np.eye(2), [0.1, 0.0], params, np.eye(2), [0.0, 0.0])


class CertificationTestCase(unittest.TestCase):
    def setUp(self):
        self.lattice = Lattice.centered(41, 1.0, 2)
        self.params = EllipticityParams(1.0, 1.0, 0.0)
        self.region = ball(0.5, 2)

    def test_concave_quadratic_is_a_supersolution(self):
        u = GridFunction.from_function(self.lattice, half_square(-1.0))
        report = check_supersolution(u, 0.0, self.params, self.region, 1e-9)
        self.assertTrue(report.passed)
        self.assertEqual(report.checked_nodes, report.active_nodes)
        self.assertEqual(report.max_super_residual, 0.0)

    def test_convex_quadratic_fails_at_the_origin(self):
        u = GridFunction.from_function(self.lattice, half_square(1.0))
        report = check_supersolution(u, 0.0, self.params, self.region, 1e-9)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.max_super_residual, 2.0, places=8)
        row = report.csv_row()
        self.assertEqual(list(row.keys()), HypothesisReport.CSV_COLUMNS)
        self.assertFalse(row['pass'])

    def test_sign_symmetry(self):
        u = GridFunction.from_function(self.lattice, lambda x: np.sin(2.0 * x[..., 0]) + x[..., 1] ** 3)
        minus_u = u.scaled(-1.0)
        params = EllipticityParams(1.0, 3.0, 0.2)
        sup = check_supersolution(u, 0.5, params, self.region, 1e-9)
        sub = check_subsolution(minus_u, 0.5, params, self.region, 1e-9)
        self.assertEqual(sup.active_nodes, sub.active_nodes)
        self.assertAlmostEqual(sup.max_super_residual, sub.max_sub_residual, places=9)
        both = check_two_sided(u, 0.5, params, self.region, 1e-9)
        self.assertAlmostEqual(both.max_super_residual, sup.max_super_residual, places=12)

    def test_affine_with_large_slope(self):
        params = EllipticityParams(1.0, 2.0, 0.5)
        u = GridFunction.from_function(self.lattice, lambda x: 3.0 * x[..., 0] + 1.0)
        self.assertTrue(check_supersolution(u, 0.0, params, self.region, 1e-9).passed)
        self.assertTrue(check_subsolution(u, 0.0, params, self.region, 1e-9).passed)

    def test_concave_quadratic_is_not_a_subsolution(self):
        u = GridFunction.from_function(self.lattice, half_square(-1.0))
        report = check_subsolution(u, 0.0, self.params, self.region, 1e-9)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.max_sub_residual, 2.0, places=8)

    def test_guard_band(self):
        self.assertEqual(guard_band(self.params, 0.1), 0.0)
        self.assertAlmostEqual(guard_band(EllipticityParams(1.0, 1.0, 0.5), 0.1), 1.0)
        u = GridFunction.from_function(self.lattice, lambda x: 0.55 * x[..., 0])
        report = check_supersolution(u, 0.0, EllipticityParams(1.0, 1.0, 0.5), self.region, 1e-9)
        self.assertEqual(report.active_nodes, 0)
        self.assertEqual(report.guard_nodes, report.checked_nodes)

    def test_levels_without_active_nodes(self):
        u = GridFunction(self.lattice, np.full(self.lattice.shape, 3.0))
        levels = certification_levels(u, EllipticityParams(1.0, 1.0, 0.1), self.region)
        self.assertEqual(levels, (float('-inf'), float('-inf')))


class ScaleTransformTestCase(unittest.TestCase):
    def setUp(self):
        self.lattice = Lattice.centered(41, 1.0, 2)

    def test_identity(self):
        u = GridFunction.from_function(self.lattice, lambda x: np.cos(x[..., 0]) * x[..., 1])
        v = scale_transform(u, (0.0, 0.0), 1.0, 1.0)
        self.assertEqual(v.lattice, u.lattice)
        np.testing.assert_array_equal(v.values, u.values)

    def test_quadratic(self):
        params = EllipticityParams(1.0, 1.0, 0.1)
        u = GridFunction.from_function(self.lattice, half_square(1.0))
        v = scale_transform(u, (0.0, 0.0), 0.5, 2.0, params)
        pts = v.lattice.points()
        np.testing.assert_allclose(v.values, 0.25 * np.sum(pts * pts, axis=-1), atol=1e-12)
        self.assertAlmostEqual(v.meta['gamma'], 0.1)
        self.assertAlmostEqual(v.meta['rhs_factor'], 0.5)
        self.assertAlmostEqual(v.meta['params'].gamma, 0.1)

    def test_certification_scales(self):
        params = EllipticityParams(1.0, 2.0, 0.0)
        u = GridFunction.from_function(self.lattice, lambda x: np.sin(x[..., 0] + 0.3) * np.cosh(x[..., 1]))
        r, K = 0.5, 2.0
        level_u, _ = certification_levels(u, params, ball(0.5, 2))
        v = scale_transform(u, (0.0, 0.0), r, K, params)
        level_v, _ = certification_levels(v, params, ball(1.0, 2))
        self.assertLessEqual(level_v, r * r * K * level_u + 1e-9 * max(1.0, abs(level_u)))
        self.assertTrue(check_supersolution(v, r * r * K * level_u + 1e-9, params, ball(1.0, 2), 1e-9).passed)

    def test_strided_alignment(self):
        u = GridFunction.from_function(self.lattice, lambda x: x[..., 0])
        v = scale_transform(u, (0.5, 0.0), 1.0, 1.0, stride=2)
        self.assertAlmostEqual(v.lattice.spacing, 2.0 * self.lattice.spacing)
        idx = v.lattice.index_of((0.0, 0.0))
        self.assertIsNotNone(idx)
        self.assertAlmostEqual(v[idx], 0.5)

    def test_errors(self):
        u = GridFunction(self.lattice, np.zeros(self.lattice.shape))
        with self.assertRaisesRegex(AlignmentError, 'alignment required'):
            scale_transform(u, (0.01, 0.0), 0.5, 1.0)
        with self.assertRaises(ParameterError):
            scale_transform(u, (0.0, 0.0), 1.5, 1.0)
        with self.assertRaises(ParameterError):
            scale_transform(u, (0.0, 0.0), 0.5, 0.5)
        with self.assertRaises(AlignmentError):
            scale_transform(u, (0.0, 0.0), 1.0, 1.0, stride=25)


def suite():
    loader = unittest.TestLoader()
    return unittest.TestSuite([loader.loadTestsFromTestCase(OperatorTestCase),
                               loader.loadTestsFromTestCase(CertificationTestCase),
                               loader.loadTestsFromTestCase(ScaleTransformTestCase)])
