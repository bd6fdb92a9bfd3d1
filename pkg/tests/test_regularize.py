import unittest

import numpy as np

from cusplab.errors import ParameterError
from cusplab.lattice import GridFunction, Lattice, ball
from cusplab.regularize import clamp_above_and_convolve, inf_convolve, lower_envelope, nested_level_sets, \
    semi_concavity_certificate


def brute_force(values, c):
    """Exact O(N^2) minimum with the same summation order as the axis passes"""
    shape = values.shape
    best = np.full(shape, np.inf)
    arg = np.zeros(shape + (len(shape),), dtype=int)
    for i in np.ndindex(*shape):
        winner = None
        for j in np.ndindex(*shape):
            total = values[j]
            for axis in reversed(range(len(shape))):
                total = total + c * float((i[axis] - j[axis]) ** 2)
            if total < best[i]:
                best[i] = total
                winner = j
        arg[i] = winner
    return best, arg


def line(n, half_width):
    return Lattice.centered(n, half_width, 1)


class InfConvolutionTestCase(unittest.TestCase):
    def test_constant_is_a_fixed_point(self):
        lattice = Lattice.centered(15, 1.0, 2)
        v = GridFunction(lattice, np.full(lattice.shape, 3.0))
        result = inf_convolve(v, 0.1)
        np.testing.assert_array_equal(result.smoothed.values, v.values)
        self.assertEqual(result.max_displacement, 0.0)

    def test_lower_envelope_against_brute_force(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            f = rng.normal(size=int(rng.integers(3, 40)))
            c = float(rng.uniform(0.01, 2.0))
            values, argmins = lower_envelope(f, c)
            idx = np.arange(len(f))
            table = f[None, :] + c * ((idx[:, None] - idx[None, :]) ** 2).astype(float)
            np.testing.assert_array_equal(values, table.min(axis=1))
            np.testing.assert_array_equal(argmins, table.argmin(axis=1))

    def test_matches_brute_force_on_random_grids(self):
        rng = np.random.default_rng(17)
        for _ in range(8):
            shape = tuple(int(n) for n in rng.integers(3, 9, size=2))
            lattice = Lattice(shape, (0.0, 0.0), 0.1)
            v = GridFunction(lattice, rng.uniform(0.0, 1.0, size=shape))
            eps = float(rng.uniform(0.005, 0.05))
            result = inf_convolve(v, eps)
            best, arg = brute_force(v.values, lattice.spacing ** 2 / (2.0 * eps))
            np.testing.assert_array_equal(result.smoothed.values, best)
            np.testing.assert_array_equal(result.argmin, arg)
            self.assertTrue(np.all(result.smoothed.values <= v.values))

    def test_moreau_envelope_of_abs(self):
        lattice = line(2001, 1.0)
        h = lattice.spacing
        eps = 0.1
        s = lattice.axes()[0]
        v = GridFunction(lattice, np.abs(s))
        huber = np.where(np.abs(s) <= eps, s * s / (2.0 * eps), np.abs(s) - 0.5 * eps)
        smoothed = inf_convolve(v, eps).smoothed.values
        self.assertLessEqual(np.max(np.abs(smoothed - huber)), h * (1.0 + h / (2.0 * eps)) + 1e-12)

    def test_moreau_envelope_of_quadratic(self):
        lattice = line(2001, 1.0)
        s = lattice.axes()[0]
        a, eps = 2.0, 0.1
        v = GridFunction(lattice, 0.5 * a * s * s)
        expected = 0.5 * a / (1.0 + a * eps) * s * s
        np.testing.assert_allclose(inf_convolve(v, eps).smoothed.values, expected, atol=1e-5)

    def test_monotone_in_epsilon(self):
        lattice = Lattice.centered(31, 1.0, 2)
        rng = np.random.default_rng(4)
        v = GridFunction(lattice, rng.uniform(0.0, 2.0, size=lattice.shape))
        coarse = inf_convolve(v, 0.05).smoothed.values
        fine = inf_convolve(v, 0.01).smoothed.values
        self.assertTrue(np.all(coarse <= fine))
        self.assertTrue(np.all(fine <= v.values))

    def test_semi_concavity(self):
        lattice = Lattice.centered(41, 1.0, 2)
        h = lattice.spacing
        rng = np.random.default_rng(9)
        for eps in (0.02, 0.1):
            v = GridFunction(lattice, rng.uniform(0.0, 1.0, size=lattice.shape))
            smoothed = inf_convolve(v, eps).smoothed
            passed, worst = semi_concavity_certificate(smoothed, (1.0 + 4.0 * h) / eps)
            self.assertTrue(passed, 'eps={} worst={}'.format(eps, worst))

        concave = GridFunction.from_function(lattice, lambda x: -np.sum(x * x, axis=-1))
        self.assertTrue(semi_concavity_certificate(concave, 0.0, 1e-9)[0])

        quartic_lattice = line(2001, 1.0)
        quartic = GridFunction(quartic_lattice, quartic_lattice.axes()[0] ** 4)
        passed, worst = semi_concavity_certificate(quartic, 5.0)
        self.assertFalse(passed)
        self.assertLess(abs(worst - 12.0), 0.05)

    def test_invalid_epsilon(self):
        v = GridFunction(Lattice.centered(5, 1.0, 1), np.zeros(5))
        with self.assertRaises(ParameterError):
            inf_convolve(v, 0.0)


class ClampTestCase(unittest.TestCase):
    def setUp(self):
        self.lattice = Lattice.centered(41, 1.0, 2)

    def test_below_clamp_equals_plain_convolution(self):
        rng = np.random.default_rng(1)
        u = GridFunction(self.lattice, rng.uniform(0.0, 1.0, size=self.lattice.shape))
        plain = inf_convolve(u, 0.05)
        clamped = clamp_above_and_convolve(u, 1.0, 0.05)
        np.testing.assert_array_equal(plain.smoothed.values, clamped.smoothed.values)

    def test_spike_is_clipped(self):
        values = np.ones(self.lattice.shape)
        values[20, 20] = 100.0
        result = clamp_above_and_convolve(GridFunction(self.lattice, values), 1.0, 0.05)
        self.assertLessEqual(result.smoothed.values.max(), 2.0)

    def test_displacement_bound(self):
        rng = np.random.default_rng(21)
        M = 1.0
        for eps in (0.001, 0.01, 0.05):
            u = GridFunction(self.lattice, rng.uniform(0.0, 2.0 * M, size=self.lattice.shape))
            result = clamp_above_and_convolve(u, M, eps)
            self.assertTrue(result.within_bound)
            self.assertLessEqual(result.max_displacement, 2.0 * np.sqrt(4.0 * M * eps) + self.lattice.spacing)
            field = result.displacement_function()
            self.assertEqual(field.lattice, self.lattice)
        with self.assertRaises(ParameterError):
            clamp_above_and_convolve(u, 0.0, 0.01)


class NestingTestCase(unittest.TestCase):
    def test_nested_level_sets(self):
        lattice = Lattice.centered(41, 1.0, 2)
        u = GridFunction.from_function(lattice, lambda x: 2.0 + np.sin(3.0 * x[..., 0]) * np.cos(2.0 * x[..., 1]))
        report = nested_level_sets(u, [0.1, 0.05, 0.025, 0.0125], 2.0, ball(0.9, 2))
        self.assertTrue(report.nested)
        self.assertTrue(report.contained)
        self.assertTrue(report.monotone)
        self.assertLessEqual(report.measures[-1], report.target)

        single = nested_level_sets(u, [0.1], 2.0)
        self.assertTrue(single.nested)

        for bad in ([], [0.1, 0.1], [0.05, 0.1]):
            with self.assertRaises(ParameterError):
                nested_level_sets(u, bad, 2.0)


def suite():
    loader = unittest.TestLoader()
    return unittest.TestSuite([loader.loadTestsFromTestCase(InfConvolutionTestCase),
                               loader.loadTestsFromTestCase(ClampTestCase),
                               loader.loadTestsFromTestCase(NestingTestCase)])
