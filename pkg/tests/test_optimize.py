"""Derivative-free minimizer and the deterministic start-point grid."""

import numpy as np
import pytest

from tiltleague.optimize import (
    OptimizeError,
    halton,
    multistart_points,
    nelder_mead,
)


def sphere_at(c):
    return lambda x: float(np.sum((x - np.asarray(c)) ** 2))


def test_finds_interior_quadratic_minimum():
    res = nelder_mead(sphere_at([0.3, -0.2, 0.7]), [0.0, 0.0, 0.0],
                      lo=[-1, -1, -1], hi=[1, 1, 1])
    assert res.converged
    np.testing.assert_allclose(res.x, [0.3, -0.2, 0.7], atol=1e-5)
    assert res.fun < 1e-9


def test_constrained_minimum_lands_on_the_face():
    # unconstrained optimum at -1 sits outside the box, so the solver must
    # settle on the lower bound
    res = nelder_mead(lambda x: (x[0] + 1.0) ** 2, [1.5], lo=[0.0], hi=[2.0])
    assert res.x[0] == pytest.approx(0.0, abs=1e-6)
    assert res.fun == pytest.approx(1.0, abs=1e-6)


def test_iterates_never_leave_the_box():
    seen = []

    def obj(x):
        seen.append(x.copy())
        return float((x[0] - 5.0) ** 2 + x[1] ** 2)

    nelder_mead(obj, [0.5, 0.5], lo=[0.0, 0.0], hi=[1.0, 1.0], max_evals=200)
    pts = np.array(seen)
    assert np.all(pts >= -1e-15) and np.all(pts <= 1.0 + 1e-15)


def test_rosenbrock_valley():
    def rosen(x):
        return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)

    res = nelder_mead(rosen, [-1.2, 1.0], lo=[-2, -2], hi=[2, 2],
                      max_evals=4000, xtol=1e-9, ftol=1e-14)
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-4)


def test_runs_are_bit_identical():
    a = nelder_mead(sphere_at([0.1, 0.9]), [0.4, 0.4], lo=[0, 0], hi=[1, 1])
    b = nelder_mead(sphere_at([0.1, 0.9]), [0.4, 0.4], lo=[0, 0], hi=[1, 1])
    np.testing.assert_array_equal(a.x, b.x)
    assert a.fun == b.fun and a.evaluations == b.evaluations


def test_budget_is_respected():
    calls = 0

    def obj(x):
        nonlocal calls
        calls += 1
        return float(np.sum(x ** 2))

    res = nelder_mead(obj, [0.9] * 4, lo=[-1] * 4, hi=[1] * 4, max_evals=50)
    assert res.evaluations == calls
    # one reflect/expand/contract round may finish after crossing the cap
    assert calls <= 50 + 5


def test_non_finite_objective_values_are_survivable():
    def holey(x):
        if x[0] < 0.3:
            return float("nan")
        return (x[0] - 0.5) ** 2

    res = nelder_mead(holey, [0.8], lo=[0.0], hi=[1.0])
    assert res.x[0] == pytest.approx(0.5, abs=1e-5)


def test_bad_boxes_are_rejected():
    with pytest.raises(OptimizeError):
        nelder_mead(sphere_at([0.0]), [0.0], lo=[1.0], hi=[0.0])
    with pytest.raises(OptimizeError):
        nelder_mead(sphere_at([0.0, 0.0]), [0.0, 0.0], lo=[0.0], hi=[1.0, 1.0])


def test_start_point_outside_box_is_clipped():
    res = nelder_mead(sphere_at([0.5]), [7.0], lo=[0.0], hi=[1.0])
    assert res.x[0] == pytest.approx(0.5, abs=1e-6)


# -- Halton sequence --------------------------------------------------------------

def test_halton_base2_radical_inverse():
    got = halton(1, 6)[:, 0]
    np.testing.assert_allclose(got, [1 / 2, 1 / 4, 3 / 4, 1 / 8, 5 / 8, 3 / 8],
                               atol=1e-15)


def test_halton_base3_second_coordinate():
    got = halton(2, 6)[:, 1]
    np.testing.assert_allclose(got, [1 / 3, 2 / 3, 1 / 9, 4 / 9, 7 / 9, 2 / 9],
                               atol=1e-15)


def test_halton_stays_in_open_unit_cube():
    pts = halton(5, 400)
    assert pts.shape == (400, 5)
    assert np.all(pts > 0.0) and np.all(pts < 1.0)


def test_halton_prefix_property():
    np.testing.assert_array_equal(halton(3, 10), halton(3, 25)[:10])


# -- multistart grid ---------------------------------------------------------------

def test_multistart_leads_with_the_centre():
    pts = multistart_points([0.0, 10.0], [2.0, 30.0], 4)
    np.testing.assert_array_equal(pts[0], [1.0, 20.0])
    assert pts.shape == (4, 2)


def test_multistart_single_point_is_just_the_centre():
    pts = multistart_points([-1.0], [3.0], 1)
    np.testing.assert_array_equal(pts, [[1.0]])


def test_multistart_points_fill_the_box():
    lo, hi = np.array([0.0, -5.0, 2.0]), np.array([1.0, 5.0, 2.5])
    pts = multistart_points(lo, hi, 9)
    assert np.all(pts >= lo) and np.all(pts <= hi)
    # Halton stratification: first scaled point is the per-axis midpoint mix
    np.testing.assert_allclose(pts[1], lo + halton(3, 1)[0] * (hi - lo))
