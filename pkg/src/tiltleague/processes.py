"""Stationary nonnegative tilting processes.

Two variants: i.i.d. sequences with an arbitrary marginal, and finite-state
Markov chains started from their stationary law. The Markov side exposes the
quantities the limit formulas need exactly: k-step joint distributions,
strong-mixing coefficients ``alpha(n)``, and a geometric tail envelope used
to truncate autocovariance series with a certified bound.

State counts are capped at 16: the mixing-coefficient computation scales
with 2^(#states) and the worked examples only ever need two states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .measures import Discrete, Measure, sample

MAX_STATES = 16
_ROW_SUM_TOL = 1e-12
_STATIONARY_TOL = 1e-10


class ProcessError(ValueError):
    """Invalid process construction or use."""


@dataclass(frozen=True)
class MarkovTilting:
    """Finite-state Markov tilting process, always started stationary.

    ``stationary`` is computed from the transition matrix, never supplied.
    The chain must be irreducible and aperiodic; without that the mixing
    coefficients cannot be summable and none of the series formulas apply.
    """

    states: tuple[float, ...]
    transition: np.ndarray = field(repr=False)
    stationary: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.transition.setflags(write=False)
        self.stationary.setflags(write=False)

    @property
    def n_states(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class IIDTilting:
    """Independent draws from ``marginal`` at every index."""

    marginal: Measure


TiltingProcess = Union[IIDTilting, MarkovTilting]


def _solve_stationary(transition: np.ndarray) -> np.ndarray:
    """Stationary vector of a row-stochastic matrix.

    Solves (P^T - I) pi = 0 with the normalization row appended, as a dense
    least-squares system; the matrices here are tiny.
    """
    n = transition.shape[0]
    a = np.vstack([transition.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.any(pi < -1e-12):
        raise ProcessError(f"stationary solve produced negative mass: {pi}")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def markov_tilting(states, transition) -> MarkovTilting:
    """Validated Markov tilting process from states and a transition matrix."""
    states = tuple(float(s) for s in states)
    trans = np.array(transition, dtype=float)
    n = len(states)
    if n < 2:
        raise ProcessError("a Markov tilting process needs at least 2 states")
    if n > MAX_STATES:
        raise ProcessError(
            f"{n} states exceed the supported maximum of {MAX_STATES}")
    if any(s <= 0 or not math.isfinite(s) for s in states):
        raise ProcessError(f"tilting states must be finite and > 0: {states}")
    if trans.shape != (n, n):
        raise ProcessError(
            f"transition shape {trans.shape} does not match {n} states")
    if np.any(trans < 0) or not np.all(np.isfinite(trans)):
        raise ProcessError("transition entries must be finite and >= 0")
    row_sums = trans.sum(axis=1)
    if np.max(np.abs(row_sums - 1.0)) > _ROW_SUM_TOL:
        raise ProcessError(f"transition rows must sum to 1, got {row_sums}")

    # Irreducibility: (I + P)^n is positive iff the chain's digraph is
    # strongly connected.
    reach = np.linalg.matrix_power(np.eye(n) + trans, n)
    if np.any(reach <= 0):
        raise ProcessError("transition matrix is reducible")
    # Aperiodicity: a periodic irreducible chain has a non-unit eigenvalue
    # on the unit circle, which would make every mixing bound here useless.
    if slem(trans) >= 1.0 - 1e-12:
        raise ProcessError(
            "second-largest eigenvalue modulus is 1; chain is periodic "
            "or too slowly mixing to support the series computations")

    if n == 2:
        # Direct solution of pi P = pi for the 2-state chain. Written in
        # this closed form so degenerate parameter choices (equal rows)
        # yield an exactly representable stationary vector.
        pa, pb = trans[0, 0], trans[1, 1]
        denom = 2.0 - pa - pb
        pi = np.array([(1.0 - pb) / denom, (1.0 - pa) / denom])
    else:
        pi = _solve_stationary(trans)
    if np.max(np.abs(pi @ trans - pi)) > _STATIONARY_TOL:
        raise ProcessError("stationary vector failed the pi P = pi check")
    return MarkovTilting(states, trans, pi)


def markov2(a: float, b: float, pa: float, pb: float) -> MarkovTilting:
    """Two-state chain on values ``{a, b}`` with stay-probabilities ``pa, pb``."""
    return markov_tilting((a, b), [[pa, 1.0 - pa], [1.0 - pb, pb]])


def iid_tilting(marginal: Measure) -> IIDTilting:
    return IIDTilting(marginal)


def marginal_measure(proc: TiltingProcess) -> Measure:
    """The one-dimensional marginal law (the measure called nu)."""
    if isinstance(proc, IIDTilting):
        return proc.marginal
    return Discrete(proc.states, tuple(float(w) for w in proc.stationary))


def slem(transition: np.ndarray) -> float:
    """Second-largest eigenvalue modulus of a stochastic matrix."""
    mods = np.sort(np.abs(np.linalg.eigvals(np.asarray(transition, dtype=float))))
    return float(mods[-2]) if len(mods) > 1 else 0.0


def _matrix_power(transition: np.ndarray, k: int) -> np.ndarray:
    """P^k by repeated squaring, accumulated in extended precision."""
    if k < 0:
        raise ProcessError(f"matrix power needs k >= 0, got {k}")
    base = transition.astype(np.longdouble)
    out = np.eye(transition.shape[0], dtype=np.longdouble)
    while k:
        if k & 1:
            out = out @ base
        base = base @ base
        k >>= 1
    return out


def joint_law(p: MarkovTilting, k: int) -> np.ndarray:
    """Matrix of ``P(xi_1 = state_i, xi_{1+k} = state_j)``.

    Entry (i, j) is ``stationary_i * (P^k)_{ij}``; the power is computed by
    repeated squaring so large lags stay exact to working precision.
    """
    if k < 1:
        raise ProcessError(f"joint_law needs lag k >= 1, got {k}")
    pk = _matrix_power(p.transition, k)
    joint = p.stationary.astype(np.longdouble)[:, None] * pk
    return joint.astype(float)


def _alpha_from_joint(joint: np.ndarray, pi: np.ndarray) -> float:
    """sup over events A, B on the two coordinates of |P(A&B) - P(A)P(B)|.

    For fixed A the sup over B is attained at the set of columns whose
    discrepancy shares one sign, so only the 2^S choices of A need
    enumerating; B then costs nothing. This equals the full 2^S x 2^S
    enumeration exactly (the test suite checks that on small chains).
    """
    n = len(pi)
    best = 0.0
    for mask in range(1, (1 << n) - 1):
        rows = [i for i in range(n) if mask >> i & 1]
        pa = math.fsum(pi[i] for i in rows)
        # d_j = P(A and {xi_{1+k} = j}) - P(A) pi_j
        pos = neg = 0.0
        for j in range(n):
            d = math.fsum(joint[i, j] for i in rows) - pa * pi[j]
            if d > 0:
                pos += d
            else:
                neg -= d
        best = max(best, pos, neg)
    return best


def alpha(proc: TiltingProcess, n: int) -> float:
    """Strong-mixing coefficient between ``xi_1`` and ``xi_{1+n}``.

    For i.i.d. tilting this is exactly 0. For a stationary Markov chain the
    mixing coefficient between past and future sigma-fields reduces to the
    two-coordinate form computed here by exact enumeration over events.
    """
    if n < 1:
        raise ProcessError(f"alpha needs n >= 1, got {n}")
    if isinstance(proc, IIDTilting):
        return 0.0
    return _alpha_from_joint(joint_law(proc, n), proc.stationary)


def alpha_tail_bound(p: MarkovTilting, n: int) -> float:
    """Geometric envelope ``C * lambda^n`` dominating ``alpha(m)`` for m >= n.

    ``lambda`` is the second-largest eigenvalue modulus and C = alpha(1) /
    lambda; a chain whose SLEM is not below 1 has no such envelope and is
    rejected.
    """
    if n < 1:
        raise ProcessError(f"alpha_tail_bound needs n >= 1, got {n}")
    lam = slem(p.transition)
    if lam >= 1.0:
        raise ProcessError(
            f"no geometric mixing envelope: eigenvalue modulus {lam} >= 1")
    if lam == 0.0:
        return 0.0
    c = alpha(p, 1) / lam
    return c * lam**n


# -- Trajectory sampling ------------------------------------------------------

def _cum_rows(matrix: np.ndarray) -> np.ndarray:
    cum = np.cumsum(matrix, axis=-1)
    cum[..., -1] = 1.0  # guard against round-off shaving the last bucket
    return cum


def states_from_uniform(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF lookup: number of cumulative buckets at or below u."""
    return np.minimum(
        np.searchsorted(cum, u, side="right"), len(cum) - 1)


def chain_states_batch(p: MarkovTilting, u_init: np.ndarray,
                       u_steps: np.ndarray) -> np.ndarray:
    """Evolve many chain paths at once from pre-drawn uniforms.

    ``u_init`` has shape (R,), ``u_steps`` shape (R, L-1); the result is an
    (R, L) integer state array. Row r depends only on row r of the inputs,
    so callers can assign one stream per path and keep full reproducibility
    while the time loop runs vectorized across paths.
    """
    cum_pi = _cum_rows(p.stationary.copy())
    cum_rows = _cum_rows(p.transition.copy())
    n_paths, n_steps = u_steps.shape
    states = np.empty((n_paths, n_steps + 1), dtype=np.int64)
    states[:, 0] = states_from_uniform(cum_pi, u_init)
    last = cum_rows.shape[1] - 1
    for t in range(n_steps):
        rows = cum_rows[states[:, t]]
        nxt = (u_steps[:, t, None] >= rows).sum(axis=1)
        states[:, t + 1] = np.minimum(nxt, last)
    return states


def stationary_states_batch(p: MarkovTilting, u: np.ndarray) -> np.ndarray:
    """Independent stationary draws (state indices) from uniforms of any shape."""
    return states_from_uniform(_cum_rows(p.stationary.copy()), u)


def sample_path(proc: TiltingProcess, length: int,
                rng: np.random.Generator) -> np.ndarray:
    """One stationary trajectory of the tilting values.

    Markov paths start from the stationary law and follow the transition
    matrix; i.i.d. paths are plain marginal draws. Only the caller's stream
    is consumed; nothing else mutates.
    """
    if length < 1:
        raise ProcessError(f"path length must be >= 1, got {length}")
    if isinstance(proc, IIDTilting):
        return np.asarray(sample(proc.marginal, rng, size=length), dtype=float)
    u = rng.random(length)
    states = chain_states_batch(proc, u[:1], u[None, 1:])[0]
    return np.asarray(proc.states, dtype=float)[states]
