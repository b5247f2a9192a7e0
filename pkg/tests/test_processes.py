"""Tilting processes: stationarity, joint laws, mixing coefficients, paths.

The two-state chain admits closed forms for everything (eigenvalue
lambda = p_a + p_b - 1, stationary law, k-step joints, alpha(n)), so those
are the oracles here. The event-enumeration alpha is additionally checked
against a brute force over all pairs of events on chains with 3 and 4
states, where the closed forms no longer help.
"""

import math

import numpy as np
import pytest

from tiltleague.measures import Discrete, UniformInterval
from tiltleague.processes import (
    IIDTilting,
    ProcessError,
    alpha,
    alpha_tail_bound,
    chain_states_batch,
    joint_law,
    markov2,
    markov_tilting,
    marginal_measure,
    sample_path,
    slem,
    stationary_states_batch,
    states_from_uniform,
)


def two_state_joint_oracle(pa: float, pb: float, k: int) -> np.ndarray:
    """k-step joint law of (xi_1, xi_{1+k}) from the eigendecomposition.

    P^k = S diag(1, lam)^k S^{-1} with lam = pa + pb - 1; multiplying rows by
    the stationary weights gives the joint. The off-diagonal factor must be
    (1 - lam^k): with (lam^k - 1) the expression is a negative number, not a
    probability.
    """
    lam = pa + pb - 1.0
    nu_a = (1.0 - pb) / (2.0 - pa - pb)
    nu_b = (1.0 - pa) / (2.0 - pa - pb)
    denom = pa + pb - 2.0
    return np.array([
        [nu_a * (pb - 1.0 + (pa - 1.0) * lam**k) / denom,
         nu_a * (pa - 1.0) * (1.0 - lam**k) / denom],
        [nu_b * (pb - 1.0) * (1.0 - lam**k) / denom,
         nu_b * (pa - 1.0 + (pb - 1.0) * lam**k) / denom],
    ])


# -- construction --------------------------------------------------------------

def test_markov2_stationary_closed_form():
    chain = markov2(0.5, 2.0, 0.92, 0.5)
    np.testing.assert_allclose(chain.stationary, [0.5 / 0.58, 0.08 / 0.58],
                               rtol=0, atol=1e-15)


def test_symmetric_chain_stationary_is_half():
    chain = markov2(0.5, 2.0, 0.4, 0.4)
    np.testing.assert_allclose(chain.stationary, [0.5, 0.5], atol=1e-15)
    # The independent-days chain must come out exact: the series formulas
    # test its mixing coefficients against literal zero.
    assert tuple(markov2(0.5, 2.0, 0.5, 0.5).stationary) == (0.5, 0.5)


def test_transition_rows_must_be_stochastic():
    with pytest.raises(ProcessError):
        markov_tilting((1.0, 2.0), [[0.5, 0.4], [0.3, 0.7]])


def test_states_must_be_positive():
    with pytest.raises(ProcessError):
        markov2(0.0, 2.0, 0.5, 0.5)


def test_reducible_chain_rejected():
    with pytest.raises(ProcessError):
        markov_tilting((1.0, 2.0), [[1.0, 0.0], [0.0, 1.0]])


def test_periodic_chain_rejected():
    # Deterministic alternation has eigenvalue -1: no mixing, no series.
    with pytest.raises(ProcessError):
        markov_tilting((1.0, 2.0), [[0.0, 1.0], [1.0, 0.0]])


def test_state_count_cap():
    n = 17
    uniform = np.full((n, n), 1.0 / n)
    with pytest.raises(ProcessError):
        markov_tilting(tuple(range(1, n + 1)), uniform)


def test_marginal_measure_preserves_state_order():
    chain = markov2(2.0, 0.5, 0.9, 0.3)
    m = marginal_measure(chain)
    assert isinstance(m, Discrete)
    assert m.values == (2.0, 0.5)
    np.testing.assert_allclose(m.weights, chain.stationary, atol=1e-15)


# -- joint laws ----------------------------------------------------------------

@pytest.mark.parametrize("pa,pb", [(0.4, 0.4), (0.92, 0.92), (0.99, 0.99),
                                   (0.92, 0.37), (0.55, 0.80)])
@pytest.mark.parametrize("k", [1, 2, 5, 20])
def test_joint_law_matches_eigendecomposition(pa, pb, k):
    chain = markov2(0.5, 2.0, pa, pb)
    np.testing.assert_allclose(joint_law(chain, k),
                               two_state_joint_oracle(pa, pb, k),
                               rtol=0, atol=1e-13)


def test_joint_law_single_step_value():
    # nu_a * P_aa = 0.5 * 0.4
    chain = markov2(0.5, 2.0, 0.4, 0.4)
    assert joint_law(chain, 1)[0, 0] == pytest.approx(0.2, abs=1e-15)


def test_joint_law_rows_and_columns_are_stationary():
    chain = markov2(0.5, 2.0, 0.7, 0.3)
    j = joint_law(chain, 4)
    np.testing.assert_allclose(j.sum(axis=1), chain.stationary, atol=1e-14)
    np.testing.assert_allclose(j.sum(axis=0), chain.stationary, atol=1e-14)


def test_joint_law_decouples_at_large_lag():
    chain = markov2(0.5, 2.0, 0.6, 0.6)
    j = joint_law(chain, 400)  # lambda^400 = 0.2^400, i.e. exactly negligible
    outer = np.outer(chain.stationary, chain.stationary)
    np.testing.assert_allclose(j, outer, atol=1e-15)


# -- mixing coefficients -------------------------------------------------------

def test_alpha_two_state_closed_form():
    # alpha(n) = nu_a nu_b |lambda|^n for two states.
    chain = markov2(0.5, 2.0, 0.4, 0.4)
    assert alpha(chain, 1) == pytest.approx(0.05, abs=1e-15)
    assert alpha(chain, 3) == pytest.approx(0.25 * 0.2**3, abs=1e-15)
    sticky = markov2(0.5, 2.0, 0.92, 0.92)
    assert alpha(sticky, 2) == pytest.approx(0.25 * 0.84**2, abs=1e-15)


def test_alpha_iid_is_exactly_zero():
    proc = IIDTilting(UniformInterval(0.5, 1.5))
    assert alpha(proc, 1) == 0.0
    assert alpha(proc, 10) == 0.0


def test_alpha_independent_days_is_exactly_zero():
    # p_a = p_b = 1/2 makes the chain a sequence of independent draws.
    chain = markov2(0.5, 2.0, 0.5, 0.5)
    assert alpha(chain, 1) == 0.0


def _alpha_brute_force(joint: np.ndarray, pi: np.ndarray) -> float:
    """Literal sup over all 2^S x 2^S pairs of events."""
    n = len(pi)
    best = 0.0
    for mask_a in range(1 << n):
        rows = [i for i in range(n) if mask_a >> i & 1]
        pa = sum(pi[i] for i in rows)
        for mask_b in range(1 << n):
            cols = [j for j in range(n) if mask_b >> j & 1]
            pab = sum(joint[i, j] for i in rows for j in cols)
            pb = sum(pi[j] for j in cols)
            best = max(best, abs(pab - pa * pb))
    return best


@pytest.mark.parametrize("n_states,seed", [(3, 0), (3, 1), (4, 2), (4, 3)])
def test_alpha_equals_brute_force_event_enumeration(n_states, seed):
    rng = np.random.default_rng(seed)
    trans = rng.uniform(0.05, 1.0, size=(n_states, n_states))
    trans /= trans.sum(axis=1, keepdims=True)
    chain = markov_tilting(tuple(range(1, n_states + 1)), trans)
    for k in (1, 2, 4):
        expected = _alpha_brute_force(joint_law(chain, k), chain.stationary)
        assert alpha(chain, k) == pytest.approx(expected, abs=1e-13)


def test_alpha_tail_bound_dominates_alpha():
    chain = markov2(0.5, 2.0, 0.92, 0.92)
    for n in (1, 2, 5, 10):
        bound = alpha_tail_bound(chain, n)
        assert bound >= alpha(chain, n) - 1e-15
        # geometric envelope C lambda^n with C = alpha(1)/lambda
        assert bound == pytest.approx(0.25 * 0.84**n, rel=1e-12)


def test_alpha_tail_bound_value():
    chain = markov2(0.5, 2.0, 0.4, 0.4)
    assert alpha_tail_bound(chain, 3) == pytest.approx(0.002, abs=1e-15)


def test_alpha_needs_positive_lag():
    chain = markov2(0.5, 2.0, 0.4, 0.4)
    with pytest.raises(ProcessError):
        alpha(chain, 0)


def test_slem_two_state_is_abs_lambda():
    assert slem(markov2(0.5, 2.0, 0.4, 0.4).transition) == pytest.approx(0.2, abs=1e-12)
    assert slem(markov2(0.5, 2.0, 0.92, 0.92).transition) == pytest.approx(0.84, abs=1e-12)


# -- path sampling -------------------------------------------------------------

def test_states_from_uniform_bucket_edges():
    cum = np.array([0.3, 0.8, 1.0])
    u = np.array([0.0, 0.29, 0.3, 0.79, 0.8, 0.999])
    np.testing.assert_array_equal(states_from_uniform(cum, u), [0, 0, 1, 1, 2, 2])


def test_chain_states_batch_matches_scalar_replay():
    chain = markov2(0.5, 2.0, 0.7, 0.6)
    rng = np.random.default_rng(11)
    u_init = rng.random(8)
    u_steps = rng.random((8, 30))
    states = chain_states_batch(chain, u_init, u_steps)
    assert states.shape == (8, 31)
    # replay row 3 by hand with the same uniforms
    cum_pi = np.cumsum(chain.stationary)
    cum_rows = np.cumsum(chain.transition, axis=1)
    s = int(np.searchsorted(cum_pi, u_init[3], side="right"))
    assert states[3, 0] == s
    for t in range(30):
        s = int(np.searchsorted(cum_rows[s], u_steps[3, t], side="right"))
        assert states[3, t + 1] == s


def test_sample_path_is_stationary_in_law():
    chain = markov2(0.5, 2.0, 0.92, 0.5)
    path = sample_path(chain, 200_000, np.random.default_rng(3))
    frac_a = np.mean(path == 0.5)
    # long-run occupation of state a; autocorrelated, so the tolerance is loose
    assert frac_a == pytest.approx(0.5 / 0.58, abs=0.01)


def test_sample_path_values_are_states_not_indices():
    chain = markov2(0.5, 2.0, 0.6, 0.6)
    path = sample_path(chain, 50, np.random.default_rng(0))
    assert set(np.unique(path)) <= {0.5, 2.0}


def test_stationary_states_batch_frequencies():
    chain = markov2(0.5, 2.0, 0.92, 0.5)
    u = np.random.default_rng(8).random(100_000)
    states = stationary_states_batch(chain, u)
    assert np.mean(states == 0) == pytest.approx(0.5 / 0.58, abs=0.005)


def test_iid_path_uses_marginal():
    proc = IIDTilting(Discrete((0.5, 2.0), (0.25, 0.75)))
    path = sample_path(proc, 40_000, np.random.default_rng(12))
    assert np.mean(path == 2.0) == pytest.approx(0.75, abs=0.01)
