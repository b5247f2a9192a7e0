"""Adaptive Simpson integrator checks against integrals known in closed form."""

import math

import pytest

from tiltleague.quadrature import QuadratureError, adaptive_simpson


def test_polynomial_cubic_is_exact():
    # Simpson's rule integrates cubics exactly; the adaptive wrapper must not
    # spoil that with its Richardson correction term.
    val = adaptive_simpson(lambda x: x**3 - 2 * x + 1, 0.0, 2.0, 1e-12)
    assert val == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("tol", [1e-6, 1e-9, 1e-12])
def test_sine_integral_meets_requested_tolerance(tol):
    val = adaptive_simpson(math.sin, 0.0, math.pi, tol)
    assert abs(val - 2.0) <= tol


def test_tolerance_actually_tightens_the_result():
    f = lambda x: math.exp(-x) * math.cos(7.0 * x)
    exact = (1.0 - math.exp(-2.0) * (math.cos(14.0) - 7.0 * math.sin(14.0))) / 50.0
    coarse = abs(adaptive_simpson(f, 0.0, 2.0, 1e-4) - exact)
    fine = abs(adaptive_simpson(f, 0.0, 2.0, 1e-12) - exact)
    assert fine <= 1e-12
    assert fine <= coarse


def test_kink_integrand_converges():
    # |x - 1/3| has a kink off the initial bisection grid; forces real
    # adaptivity rather than a lucky first panel.
    val = adaptive_simpson(lambda x: abs(x - 1.0 / 3.0), 0.0, 1.0, 1e-10)
    exact = (1.0 / 3.0) ** 2 / 2.0 + (2.0 / 3.0) ** 2 / 2.0
    assert val == pytest.approx(exact, abs=1e-10)


def test_empty_interval_is_zero():
    assert adaptive_simpson(math.exp, 1.5, 1.5, 1e-10) == 0.0


def test_reversed_bounds_rejected():
    with pytest.raises(ValueError):
        adaptive_simpson(math.exp, 1.0, 0.0, 1e-10)


def test_nonpositive_tolerance_rejected():
    with pytest.raises(ValueError):
        adaptive_simpson(math.exp, 0.0, 1.0, 0.0)


def test_budget_exhaustion_raises_with_partial_estimate():
    # A needle this narrow cannot be resolved with ~60 evaluations.
    f = lambda x: 1.0 / (1e-8 + (x - 0.123456) ** 2)
    with pytest.raises(QuadratureError) as exc:
        adaptive_simpson(f, 0.0, 1.0, 1e-12, max_evals=61)
    err = exc.value
    assert err.evaluations <= 61
    assert math.isfinite(err.estimate)
    assert err.achieved_error > 0.0
