"""Strength measures: exact expectations, CDF inversion, sampling, CSV I/O."""

import math

import numpy as np
import pytest

from tiltleague.measures import (
    Discrete,
    Empirical,
    MeasureError,
    UniformInterval,
    cdf,
    discrete,
    discrete_renormalized,
    expect,
    inverse_cdf,
    load_samples_csv,
    sample,
)


# -- construction and validation ----------------------------------------------

def test_discrete_rejects_weights_off_by_more_than_rounding():
    with pytest.raises(MeasureError):
        Discrete((0.25, 1.3), (0.6, 0.9))


def test_discrete_absorbs_rounding_level_weight_error():
    w = 1.0 / 3.0
    m = Discrete((1.0, 2.0, 3.0), (w, w, w))
    assert math.fsum(m.weights) == pytest.approx(1.0, abs=1e-12)


def test_discrete_rejects_negative_values():
    with pytest.raises(MeasureError):
        Discrete((-1.0, 2.0), (0.5, 0.5))


def test_discrete_renormalized_warns_and_rescales():
    # Total mass 1.5 is a deliberate anomaly we keep usable: rescale loudly.
    with pytest.warns(UserWarning):
        m = discrete_renormalized([(0.25, 0.6), (1.3, 0.9)])
    assert m.weights == pytest.approx((0.4, 0.6))
    assert m.values == (0.25, 1.3)


def test_uniform_interval_rejects_empty_interval():
    with pytest.raises(MeasureError):
        UniformInterval(0.7, 0.7)


# -- expectations --------------------------------------------------------------

def test_discrete_expectation_is_an_exact_sum():
    m = discrete([(0.5, 0.3), (2.0, 0.7)])
    # 0.3 * 0.25 + 0.7 * 4 = 2.875, no quadrature involved
    assert expect(m, lambda x: x * x) == pytest.approx(2.875, abs=1e-15)


def test_uniform_expectation_matches_closed_form():
    m = UniformInterval(0.1, 0.9)
    exact = (0.9**3 - 0.1**3) / 3.0 / 0.8
    assert expect(m, lambda x: x * x, 1e-12) == pytest.approx(exact, abs=1e-11)


def test_empirical_expectation_averages_the_atoms():
    m = Empirical((0.2, 0.4, 1.6))
    assert expect(m, lambda x: x) == pytest.approx((0.2 + 0.4 + 1.6) / 3.0)


# -- cdf / quantile ------------------------------------------------------------

def test_cdf_uniform_values():
    m = UniformInterval(1.0, 3.0)
    assert cdf(m, 0.5) == 0.0
    assert cdf(m, 2.0) == 0.5
    assert cdf(m, 3.5) == 1.0


def test_inverse_cdf_at_zero_is_zero_by_convention():
    # The ranking-curve formulas evaluate H^{-1}(0) literally; the convention
    # used everywhere is 0, not the infimum of the support.
    assert inverse_cdf(UniformInterval(0.2, 0.8), 0.0) == 0.0
    assert inverse_cdf(discrete([(0.5, 0.5), (2.0, 0.5)]), 0.0) == 0.0


def test_inverse_cdf_discrete_steps():
    m = discrete([(0.5, 0.25), (1.0, 0.5), (2.0, 0.25)])
    assert inverse_cdf(m, 0.1) == 0.5
    assert inverse_cdf(m, 0.25) == 0.5  # right-continuous step boundary
    assert inverse_cdf(m, 0.26) == 1.0
    assert inverse_cdf(m, 0.75) == 1.0
    assert inverse_cdf(m, 1.0) == 2.0


@pytest.mark.parametrize("m", [
    UniformInterval(0.3, 1.7),
    discrete([(0.25, 0.2), (0.5, 0.3), (1.3, 0.5)]),
    Empirical((0.1, 0.4, 0.4, 0.9, 2.3)),
])
def test_generalized_inverse_galois_inequalities(m):
    # H^{-1}(x) <= y exactly when x <= H(y), for x in (0, 1].
    rng = np.random.default_rng(2024)
    for _ in range(300):
        x = float(rng.uniform(1e-9, 1.0))
        y = float(rng.uniform(0.0, 2.5))
        assert (inverse_cdf(m, x) <= y) == (x <= cdf(m, y))


def test_inverse_cdf_rejects_arguments_outside_unit_interval():
    with pytest.raises(MeasureError):
        inverse_cdf(UniformInterval(0.0, 1.0), 1.5)


# -- sampling ------------------------------------------------------------------

@pytest.mark.parametrize("m", [
    UniformInterval(0.5, 2.0),
    discrete([(0.5, 0.4), (2.0, 0.6)]),
    Empirical((0.3, 0.9, 1.1)),
])
def test_sampling_is_reproducible_from_the_generator(m):
    a = sample(m, np.random.default_rng(99), size=64)
    b = sample(m, np.random.default_rng(99), size=64)
    np.testing.assert_array_equal(a, b)


def test_sample_scalar_and_vector_agree_in_law():
    m = discrete([(0.5, 0.4), (2.0, 0.6)])
    xs = sample(m, np.random.default_rng(7), size=20000)
    assert set(np.unique(xs)) == {0.5, 2.0}
    # weight on the heavy atom: binomial sd ~ 0.0035
    assert np.mean(xs == 2.0) == pytest.approx(0.6, abs=0.02)
    one = sample(m, np.random.default_rng(7))
    assert isinstance(one, float)


def test_uniform_sample_mean_near_midpoint():
    m = UniformInterval(0.2, 1.0)
    xs = sample(m, np.random.default_rng(5), size=20000)
    assert xs.mean() == pytest.approx(0.6, abs=0.01)
    assert xs.min() >= 0.2 and xs.max() <= 1.0


# -- CSV -----------------------------------------------------------------------

def test_load_samples_csv_roundtrip(tmp_path):
    p = tmp_path / "samples.csv"
    p.write_text("strength\n0.5\n1.25\n2.0\n")
    assert load_samples_csv(p) == (0.5, 1.25, 2.0)


def test_load_samples_csv_rejects_junk(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("strength\n0.5\nnot-a-number\n")
    with pytest.raises(MeasureError):
        load_samples_csv(p)
