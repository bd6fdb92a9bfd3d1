import math

import numpy as np
import pytest

from cusplab.contact import DEFAULT_CUSP_CONSTANT
from cusplab.errors import ParameterError
from cusplab.estimates import ball_fraction, decay_factor, dyadic_oscillation, fit_decay_slope, harnack_ratio, \
    harnack_slide_diagnostic, holder_exponent, holder_scale, holder_seminorm, lebesgue_power_integral, \
    lepsilon_constants, mu_beta_feasibility, resolution_depth, survival_curve
from cusplab.lattice import GridFunction, Lattice, ball


def constant(lattice, value):
    return GridFunction(lattice, np.full(lattice.shape, float(value)))


def test_lepsilon_constants():
    constants = lepsilon_constants(0.1, DEFAULT_CUSP_CONSTANT, 2)
    assert constants['c'] == pytest.approx(0.04)
    assert constants['epsilon'] == pytest.approx(0.0018176, abs=1e-6)
    assert constants['C'] == pytest.approx(0.9 * math.pi / 0.996)
    # C~ tau^-epsilon lands on half the unit ball
    assert constants['C'] * math.exp(-constants['epsilon'] * constants['log_tau']) == pytest.approx(0.5 * math.pi)
    with pytest.raises(ParameterError):
        lepsilon_constants(1.0, DEFAULT_CUSP_CONSTANT, 2)
    with pytest.raises(ParameterError):
        lepsilon_constants(0.1, 1.0, 2)


def test_holder_exponent_and_scale():
    assert holder_exponent(0.5) == pytest.approx(0.32193, abs=1e-5)
    assert holder_scale(100.0, 1.0, 1.0, 0.5) == 2.0 ** -7
    assert holder_scale(0.0, 1.0, 1.0, 0.5) == 1.0
    assert holder_scale(0.01, 1.0, 1.0, 0.5) == 1.0


def test_survival_curve_of_a_constant():
    lattice = Lattice.centered(81, 1.25, 2)
    unit = ball(1.0, 2).measure(lattice)
    curve = survival_curve(constant(lattice, 5.0), 2.0, 3)
    assert [k for k, _, _ in curve] == [0, 1, 2, 3]
    assert [t for _, t, _ in curve] == [1.0, 2.0, 4.0, 8.0]
    assert [m for _, _, m in curve] == [unit, unit, unit, 0.0]


def test_fit_decay_slope():
    curve = [(k, 2.0 ** k, 2.0 ** (-0.5 * k)) for k in range(5)]
    assert fit_decay_slope(curve, 1e-12) == pytest.approx(-0.5)
    with pytest.raises(ParameterError):
        fit_decay_slope(curve[:1], 1e-12)


def test_slide_diagnostic():
    lattice = Lattice.centered(41, 1.0, 2)
    beta = 6.0
    diag = harnack_slide_diagnostic(constant(lattice, 1.0), beta)
    assert diag.log_t == pytest.approx(beta * math.log(0.75))
    assert diag.x0 == (20, 20)
    assert diag.r == pytest.approx(0.375)
    assert diag.h0 == pytest.approx(1.0)
    assert diag.dominates

    empty = harnack_slide_diagnostic(constant(lattice, 0.0), beta)
    assert empty.t_star == 0.0
    assert empty.x0 == (20, 20)

    with pytest.raises(ParameterError):
        harnack_slide_diagnostic(constant(lattice, -1.0), beta)


def test_harnack_ratio():
    lattice = Lattice.centered(41, 1.0, 2)
    assert harnack_ratio(constant(lattice, 2.0), 1.0) == pytest.approx(2.0 / 3.0)


def test_dyadic_oscillation_of_a_linear_function():
    lattice = Lattice.centered(129, 1.0, 2)
    depth = resolution_depth(lattice)
    assert depth == 3
    v = GridFunction.from_function(lattice, lambda x: x[..., 0])
    iterations = dyadic_oscillation(v, depth, holder_exponent(0.5), 0.5)
    assert len(iterations) == depth + 1
    assert [it.oscillation for it in iterations] == pytest.approx([2.0, 1.0, 0.5, 0.25])
    assert decay_factor(iterations) == pytest.approx(0.5)
    assert [it.alternative for it in iterations] == ['second', 'second', 'second', None]
    assert decay_factor(dyadic_oscillation(constant(lattice, 1.0), depth, 0.3, 0.5)) == 0.0


def test_holder_seminorm_and_fraction():
    lattice = Lattice.centered(129, 1.0, 2)
    v = GridFunction.from_function(lattice, lambda x: x[..., 0])
    assert holder_seminorm(v, 1.0) == pytest.approx(1.0)
    assert ball_fraction(v, -2.0, 0.5) == 1.0
    assert 0.45 < ball_fraction(v, 0.0, 0.5) < 0.5
    with pytest.raises(ParameterError):
        holder_seminorm(GridFunction(Lattice((5, 5), (0.05, 0.05), 0.1), np.zeros((5, 5))), 1.0)


def test_mu_beta_feasibility():
    result = mu_beta_feasibility(10.0, 1.0, 0.5, 2, 0.05)
    assert result.beta == 4.0
    assert result.mu == 2.0 ** -6
    assert result.K == pytest.approx(0.03187, abs=1e-4)
    assert result.feasible
    assert result.as_dict()['growth']
    with pytest.raises(ParameterError):
        mu_beta_feasibility(0.0, 1.0, 0.5, 2, 0.05)


def test_lebesgue_power_integral():
    lattice = Lattice.centered(81, 1.25, 2)
    unit = ball(1.0, 2).measure(lattice)
    assert lebesgue_power_integral(constant(lattice, 4.0), 0.5) == pytest.approx(2.0 * unit)
