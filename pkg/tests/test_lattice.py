import math
import unittest

import numpy as np

from cusplab.errors import LatticeError, ParameterError
from cusplab.lattice import Annulus, Box, GridFunction, Lattice, ball, eigenvalues_sym, gradient, gradient_field, \
    hessian, hessian_field, interior_region_mask, interior_slices, restrict_measure


def radial_power(p):
    def func(points):
        return np.sum(points * points, axis=-1) ** (-0.5 * p)
    return func


class LatticeTestCase(unittest.TestCase):
    def test_construction(self):
        lattice = Lattice.centered(201, 1.0, 2)
        self.assertEqual(lattice.shape, (201, 201))
        self.assertAlmostEqual(lattice.spacing, 0.01)
        self.assertEqual(lattice.index_of((0.0, 0.0)), (100, 100))
        np.testing.assert_allclose(lattice.point((150, 100)), [0.5, 0.0], atol=1e-12)
        self.assertIsNone(lattice.index_of((0.004, 0.0)))
        self.assertEqual(lattice.index_of((0.004, 0.0), exact=False), (100, 100))
        self.assertIsNone(lattice.index_of((3.0, 0.0)))

    def test_invalid_lattices(self):
        with self.assertRaises(LatticeError):
            Lattice((2, 5), (0.0, 0.0), 0.1)
        with self.assertRaises(LatticeError):
            Lattice((5, 5), (0.0, 0.0), 0.0)
        with self.assertRaises(LatticeError):
            Lattice((5, 5), (0.0,), 0.1)

    def test_values_must_be_finite(self):
        lattice = Lattice.centered(5, 1.0, 2)
        values = np.zeros(lattice.shape)
        values[2, 2] = np.inf
        with self.assertRaises(LatticeError):
            GridFunction(lattice, values)
        with self.assertRaises(LatticeError):
            GridFunction(lattice, np.zeros(7))

    def test_gradient_exact_on_quadratics(self):
        lattice = Lattice.centered(201, 1.0, 2)
        f = GridFunction.from_function(lattice, lambda x: 0.5 * np.sum(x * x, axis=-1))
        idx = lattice.index_of((0.3, 0.4), exact=False)
        np.testing.assert_allclose(gradient(f, idx), lattice.point(idx), atol=1e-10)

        affine = GridFunction.from_function(lattice, lambda x: 3.0 * x[..., 0] - 2.0 * x[..., 1] + 1.0)
        np.testing.assert_allclose(gradient(affine, (40, 170)), [3.0, -2.0], atol=1e-10)
        np.testing.assert_allclose(hessian(affine, (40, 170)), np.zeros((2, 2)), atol=1e-8)

    def test_mixed_hessian(self):
        lattice = Lattice.centered(201, 1.0, 2)
        f = GridFunction.from_function(lattice, lambda x: x[..., 0] * x[..., 1])
        np.testing.assert_allclose(hessian(f, (70, 120)), [[0.0, 1.0], [1.0, 0.0]], atol=1e-8)

    def test_boundary_nodes_expose_no_derivatives(self):
        lattice = Lattice.centered(11, 1.0, 2)
        f = GridFunction(lattice, np.zeros(lattice.shape))
        with self.assertRaisesRegex(LatticeError, 'interior required'):
            gradient(f, (0, 5))
        with self.assertRaisesRegex(LatticeError, 'interior required'):
            hessian(f, (5, 10))

    def test_hessian_second_order_convergence(self):
        # |x|^-4 at (1, 0): radial curvature p(p+1) = 20, tangential -p = -4
        exact = np.array([[20.0, 0.0], [0.0, -4.0]])
        errors = []
        for n, h in ((101, 0.005), (201, 0.0025)):
            lattice = Lattice((n, n), (0.75, -0.25), h)
            f = GridFunction.from_function(lattice, radial_power(4.0))
            idx = lattice.index_of((1.0, 0.0))
            self.assertIsNotNone(idx)
            errors.append(np.max(np.abs(hessian(f, idx) - exact)))
        self.assertGreaterEqual(errors[0] / errors[1], 3.5)

    def test_fields_match_pointwise_operators(self):
        lattice = Lattice.centered(21, 1.0, 2)
        f = GridFunction.from_function(lattice, lambda x: np.sin(x[..., 0]) * np.exp(x[..., 1]))
        grads = gradient_field(f)
        hessians = hessian_field(f)
        for idx in ((3, 4), (10, 10), (18, 1)):
            inner = tuple(i - 1 for i in idx)
            np.testing.assert_allclose(grads[inner], gradient(f, idx), rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(hessians[inner], hessian(f, idx), rtol=1e-12, atol=1e-12)

    def test_eigenvalues(self):
        np.testing.assert_allclose(eigenvalues_sym(np.eye(3)), [1.0, 1.0, 1.0])
        np.testing.assert_allclose(eigenvalues_sym(np.diag([1.0, -1.0])), [-1.0, 1.0])
        np.testing.assert_allclose(eigenvalues_sym([[2.0, 1.0], [1.0, 2.0]]), [1.0, 3.0], rtol=1e-10)
        with self.assertRaises(LatticeError):
            eigenvalues_sym([[0.0, 1.0], [0.0, 0.0]])

    def test_restrict_measure(self):
        lattice = Lattice.centered(251, 1.25, 2)
        h = lattice.spacing
        five = GridFunction(lattice, np.full(lattice.shape, 5.0))
        unit = ball(1.0, 2)
        self.assertEqual(restrict_measure(five, lambda v: v > 10.0, unit), 0.0)
        self.assertLess(abs(restrict_measure(five, lambda v: v > 1.0, unit) - math.pi), 10.0 * h)

        x1 = GridFunction.from_function(lattice, lambda x: x[..., 0])
        half = restrict_measure(x1, lambda v: v > 0.0, unit)
        self.assertLess(abs(half - 0.5 * math.pi), 10.0 * h)
        self.assertLessEqual(half, restrict_measure(x1, lambda v: v > -0.5, unit))

    def test_ball_measure_converges(self):
        for n in (101, 201, 401):
            lattice = Lattice.centered(n, 1.0, 2)
            for rho in (0.25, 0.5):
                region = ball(rho, 2)
                exact = region.lebesgue_measure()
                self.assertLessEqual(abs(region.measure(lattice) - exact) / exact, 3.0 * lattice.spacing / rho)

    def test_regions(self):
        lattice = Lattice.centered(41, 1.0, 2)
        ring = Annulus((0.0, 0.0), 0.25, 0.5).mask(lattice)
        r = lattice.radii()
        self.assertTrue(np.all(ring == ((r >= 0.25 - 1e-12) & (r <= 0.5 + 1e-12))))
        box = Box((-0.01, -0.01), (0.51, 0.51)).mask(lattice)
        self.assertEqual(np.count_nonzero(box), 11 * 11)
        with self.assertRaises(ParameterError):
            Annulus((0.0, 0.0), 0.5, 0.25)
        with self.assertRaises(ParameterError):
            ball(0.0, 2)
        self.assertAlmostEqual(ball(1.0, 3).lebesgue_measure(), 4.0 * math.pi / 3.0)

    def test_interior_region_mask(self):
        lattice = Lattice.centered(21, 1.0, 2)
        mask = interior_region_mask(lattice, ball(0.5, 2))
        self.assertTrue(np.any(mask))
        self.assertFalse(np.any(mask & ~lattice.interior_mask(1)))
        with self.assertRaisesRegex(LatticeError, 'interior'):
            interior_region_mask(lattice, ball(1.0, 2))
        with self.assertRaisesRegex(LatticeError, 'outside the lattice'):
            interior_region_mask(lattice, ball(0.01, 2, center=(5.0, 5.0)))
        self.assertEqual(lattice.interior_mask(1)[interior_slices(2)].size, 19 * 19)

    def test_grid_function_helpers(self):
        lattice = Lattice.centered(21, 1.0, 2)
        f = GridFunction.from_function(lattice, lambda x: x[..., 0] + 2.0)
        self.assertAlmostEqual(f.min_over(ball(0.5, 2)), 1.5)
        self.assertAlmostEqual(f.max_over(ball(0.5, 2)), 2.5)
        self.assertAlmostEqual(f.divided(2.0).max_over(ball(0.5, 2)), 1.25)
        self.assertEqual(f.digest(), f.with_values(f.values).digest())
        self.assertNotEqual(f.digest(), f.scaled(2.0).digest())
        with self.assertRaises(ValueError):
            f.values[0, 0] = 1.0


def suite():
    return unittest.TestLoader().loadTestsFromTestCase(LatticeTestCase)
