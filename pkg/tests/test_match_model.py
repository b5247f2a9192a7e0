"""Win functions and the opponent-averaged kernels built on them."""

import math

import numpy as np
import pytest

from tiltleague.match_model import (
    ConstantHalf,
    F_s,
    F_tilde_s,
    G_s,
    Kernel,
    Ratio,
    Table,
    TransformedRatio,
    WinFunctionError,
    check_antisymmetry,
    eval_f,
    table_from_csv,
)
from tiltleague.measures import Discrete


TWO_ATOM = Discrete((0.5, 2.0), (0.5, 0.5))


# -- win probability families --------------------------------------------------

def test_ratio_values():
    w = Ratio()
    assert eval_f(w, 1.0, 1.0) == 0.5
    assert eval_f(w, 3.0, 1.0) == 0.75
    assert eval_f(w, 0.0, 1.0) == 0.0


def test_constant_half_ignores_strengths():
    w = ConstantHalf()
    assert eval_f(w, 0.0, 5.0) == 0.5
    assert eval_f(w, 2.0, 0.1) == 0.5


def test_transformed_ratio_matches_direct_formula():
    # Saturating-log family, checked against the formula written with plain
    # log instead of log1p.
    w = TransformedRatio(c1=1.3, c2=0.999)
    def g(x):
        return math.log(1.0 - min(x / 1.3, 0.999))
    for x, y in [(0.5, 1.0), (0.1, 0.2), (2.0, 0.7), (1.29, 1.31)]:
        expected = g(x) / (g(x) + g(y))
        assert eval_f(w, x, y) == pytest.approx(expected, rel=1e-12)


def test_transformed_ratio_equal_strengths_give_half():
    w = TransformedRatio(c1=1.3, c2=0.999)
    assert eval_f(w, 0.7, 0.7) == pytest.approx(0.5, abs=1e-15)


def test_transformed_ratio_saturates_above_cap():
    # Beyond c1*c2 the transform is constant, so the advantage stops growing.
    w = TransformedRatio(c1=1.3, c2=0.999)
    assert eval_f(w, 5.0, 1.0) == pytest.approx(eval_f(w, 50.0, 1.0), abs=1e-12)


def test_transformed_ratio_parameter_validation():
    with pytest.raises(WinFunctionError):
        TransformedRatio(c1=0.0, c2=0.5)
    with pytest.raises(WinFunctionError):
        TransformedRatio(c1=1.0, c2=1.0)


@pytest.mark.parametrize("w", [Ratio(), ConstantHalf(),
                               TransformedRatio(1.3, 0.999)])
def test_antisymmetry_on_a_random_grid(w):
    rng = np.random.default_rng(17)
    grid = rng.uniform(0.01, 3.0, size=200)
    check_antisymmetry(w, grid, tol=1e-12)


def test_check_antisymmetry_flags_violations():
    rows = np.array([[0.5, 0.7], [0.2, 0.5]])  # f(x,y)+f(y,x) = 0.9 off-diagonal
    t = Table((0.5, 2.0), (0.5, 2.0), rows)
    with pytest.raises(WinFunctionError):
        check_antisymmetry(t, np.array([0.5, 2.0]), tol=1e-6)


def test_negative_strengths_rejected():
    with pytest.raises(WinFunctionError):
        eval_f(Ratio(), -0.5, 1.0)
    with pytest.raises(WinFunctionError):
        eval_f(Ratio(), np.array([0.5, -0.1]), np.array([1.0, 1.0]))


def test_ratio_undefined_at_origin():
    with pytest.raises(WinFunctionError):
        eval_f(Ratio(), 0.0, 0.0)


def test_scalar_and_array_paths_agree():
    rng = np.random.default_rng(23)
    xs = rng.uniform(0.01, 2.5, size=50)
    ys = rng.uniform(0.01, 2.5, size=50)
    for w in [Ratio(), ConstantHalf(), TransformedRatio(1.3, 0.999)]:
        vec = eval_f(w, xs, ys)
        scal = np.array([eval_f(w, float(x), float(y)) for x, y in zip(xs, ys)])
        np.testing.assert_allclose(vec, scal, rtol=0, atol=1e-15)


# -- tabulated win functions ----------------------------------------------------

def test_table_bilinear_interpolation_by_hand():
    t = Table((0.0, 1.0), (0.0, 2.0), np.array([[0.1, 0.3], [0.5, 0.9]]))
    # corner values pass through
    assert eval_f(t, 0.0, 0.0) == pytest.approx(0.1)
    assert eval_f(t, 1.0, 2.0) == pytest.approx(0.9)
    # midpoint blends all four corners equally
    assert eval_f(t, 0.5, 1.0) == pytest.approx((0.1 + 0.3 + 0.5 + 0.9) / 4.0)
    # interior point: x-weight 0.25, y-weight 0.75
    v = (0.1 * 0.75 + 0.5 * 0.25) * 0.25 + (0.3 * 0.75 + 0.9 * 0.25) * 0.75
    assert eval_f(t, 0.25, 1.5) == pytest.approx(v)


def test_table_clamps_outside_grid():
    t = Table((0.5, 1.0), (0.5, 1.0), np.array([[0.2, 0.4], [0.6, 0.8]]))
    assert eval_f(t, 2.0, 2.0) == pytest.approx(0.8)
    assert eval_f(t, 0.0, 0.0) == pytest.approx(0.2)


def test_table_validation():
    with pytest.raises(WinFunctionError):
        Table((1.0, 0.5), (0.5, 1.0), np.full((2, 2), 0.5))  # x not increasing
    with pytest.raises(WinFunctionError):
        Table((0.5, 1.0), (0.5, 1.0), np.array([[0.2, 1.4], [0.6, 0.8]]))


def test_table_from_csv(tmp_path):
    p = tmp_path / "win.csv"
    p.write_text("x,0.5,2.0\n0.5,0.5,0.2\n2.0,0.8,0.5\n")
    t = table_from_csv(p)
    assert eval_f(t, 0.5, 2.0) == pytest.approx(0.2)
    assert eval_f(t, 2.0, 0.5) == pytest.approx(0.8)


# -- averaged kernels -----------------------------------------------------------

def test_kernel_f_values_two_atoms():
    # E over V' of f(x, y V') with V' uniform on {1/2, 2}:
    # F_1(1/2, 1) = (f(.5,.5) + f(.5,2))/2 = (0.5 + 0.2)/2
    k = Kernel(Ratio(), TWO_ATOM)
    assert F_s(k, 1.0, 0.5, 1.0) == pytest.approx(0.35, abs=1e-12)
    assert F_s(k, 1.0, 2.0, 1.0) == pytest.approx(0.65, abs=1e-12)


def test_kernel_centering_subtracts_tilt_average():
    k = Kernel(Ratio(), TWO_ATOM)
    # E_V[F_1(V, 1)] = (0.35 + 0.65)/2 = 0.5, so the centred kernel at
    # x = 1/2 is 0.35 - 0.5.
    assert F_tilde_s(k, 1.0, 0.5, 1.0) == pytest.approx(-0.15, abs=1e-10)
    assert F_tilde_s(k, 1.0, 2.0, 1.0) == pytest.approx(0.15, abs=1e-10)


def test_kernel_g_averages_own_tilt():
    k = Kernel(Ratio(), TWO_ATOM)
    assert G_s(k, 1.0, 1.0) == pytest.approx(0.5, abs=1e-10)


def test_centred_kernel_has_zero_mean_in_first_argument():
    k = Kernel(Ratio(), TWO_ATOM)
    mean = sum(0.5 * F_tilde_s(k, 0.7, v, 1.3) for v in (0.5, 2.0))
    assert mean == pytest.approx(0.0, abs=1e-9)
