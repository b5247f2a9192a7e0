"""Limiting win-rate curve and the two quenched variance components.

For a focal team of strength ``s`` facing opponents with strengths drawn
from ``mu`` and day-to-day tilts from a stationary ergodic chain with
marginal ``nu``, the season win fraction converges to

    ell(s) = E[f(s V, U V')],   V, V' ~ nu independent, U ~ mu,

and the standardized win count is asymptotically normal with variance
``sigma2 + rho2`` where

    sigma2(s) = ell(s) - E[F_s(V, U)^2],
    rho2(s)   = E[Ft_s(V, U)^2]
                + 2 sum_{k>=1} E[Ft_s(xi_1, U) Ft_s(xi_{1+k}, U')],

``F_s(x, y) = E[f(s x, y V')]`` and ``Ft_s`` its nu-centred version in the
first argument. ``sigma2`` is the outcome-coin contribution (always in
``[0, 1/4]``); ``rho2`` is the contribution of the focal team's own tilt
autocorrelation and vanishes for IID tilts only in expectation terms beyond
lag zero.

The lag series in ``rho2`` is evaluated two independent ways for finite
chains: a truncated power series with a certified geometric tail bound, and
a closed form through the fundamental matrix. Both must agree or the
computation refuses to return a value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .match_model import Kernel, WinFunction, eval_f, F_s
from .measures import Discrete, Measure, expect
from .processes import (MarkovTilting, TiltingProcess, alpha,
                        marginal_measure, slem)


class AnalyticError(RuntimeError):
    """Variance computation failed an internal consistency requirement."""


MAX_SERIES_TERMS = 100_000


@dataclass(frozen=True)
class LimitReport:
    """Limit quantities at one strength value."""

    s: float
    ell: float
    sigma2: float
    rho2: float
    rho2_truncation_bound: float
    terms_used: int

    @property
    def total_var(self) -> float:
        return self.sigma2 + self.rho2


def ell(w: WinFunction, nu: Measure, mu: Measure, s: float,
        tol: float = 1e-10) -> float:
    """Limiting season win fraction ``E[f(s V, U V')]``."""
    if isinstance(nu, Discrete):
        # Both tilt averages are exact sums; only the mu integral costs budget.
        def g(u: float) -> float:
            return math.fsum(
                wi * wj * eval_f(w, s * vi, u * vj)
                for vi, wi in zip(nu.values, nu.weights)
                for vj, wj in zip(nu.values, nu.weights))
        return expect(mu, g, tol)

    k = Kernel(w, nu)

    def g(u: float) -> float:
        return expect(nu, lambda v: F_s(k, s, v, u, tol / 4), tol / 4)
    return expect(mu, g, tol / 2)


def _mean_f2(w: WinFunction, nu: Discrete, mu: Measure, s: float,
             tol: float, centred: bool) -> float:
    """E over (V, U) of F_s(V, U)^2, optionally with F centred in V first.

    Restricted to discrete nu so the inner tilt averages are exact; the only
    approximation is the mu quadrature of the resulting function of u.
    """
    vals = np.asarray(nu.values)
    wts = np.asarray(nu.weights)

    def h(u: float) -> float:
        f_vu = np.array([
            math.fsum(wj * eval_f(w, s * vi, u * vj)
                      for vj, wj in zip(nu.values, nu.weights))
            for vi in vals])
        if centred:
            f_vu = f_vu - math.fsum(wi * fi for wi, fi in zip(wts, f_vu))
        return math.fsum(wi * fi * fi for wi, fi in zip(wts, f_vu))

    return expect(mu, h, tol)


def sigma2(w: WinFunction, nu: Discrete, mu: Measure, s: float,
           tol: float = 1e-10) -> float:
    """Bernoulli-outcome variance component ``ell(s) - E[F_s(V, U)^2]``."""
    value = ell(w, nu, mu, s, tol / 2) - _mean_f2(w, nu, mu, s, tol / 2, False)
    if value < -tol or value > 0.25 + tol:
        raise AnalyticError(
            f"sigma2(s={s}) = {value} escapes [0, 1/4] beyond tolerance")
    return min(max(value, 0.0), 0.25)


@dataclass(frozen=True)
class Rho2Result:
    value: float
    truncation_bound: float
    terms_used: int
    series_truncated: float
    series_closed: float


def rho2_markov(g: Callable[[float, float], float], chain: MarkovTilting,
                mu: Measure, tol: float = 1e-10) -> Rho2Result:
    """Tilt-autocorrelation variance for a finite-state chain.

    ``g(x, u)`` must take values in ``[0, 1]`` (true for any
    opponent-averaged win kernel), so its centred version is bounded by 1.
    Writes the lag series over the centred kernel as a quadratic form in
    ``m_i = E_mu[gt(state_i, U)]``:

        term_k = (pi * m)^T P^k m,   series = sum_{k>=1} term_k.

    Route one truncates when the strong-mixing envelope certifies the tail
    below ``tol / 2``; route two sums the series exactly through the
    fundamental matrix ``Z = (I - P + 1 pi^T)^{-1}``. Disagreement beyond
    ``tol`` raises. The returned value uses the truncated route, whose error
    is certified.
    """
    states = np.asarray(chain.states)
    pi = np.asarray(chain.stationary)
    p = np.asarray(chain.transition)
    n_states = len(states)

    def g_centred(i: int, u: float) -> float:
        base = g(float(states[i]), u)
        mean = math.fsum(pi[j] * g(float(states[j]), u)
                         for j in range(n_states))
        return base - mean

    # Lag-zero term and the per-state mu-averages feeding the lag series.
    e_gt2 = expect(
        mu,
        lambda u: math.fsum(pi[i] * g_centred(i, u) ** 2
                            for i in range(n_states)),
        tol / 4)
    m = np.array([expect(mu, lambda u, i=i: g_centred(i, u), tol / 4)
                  for i in range(n_states)])

    lam = slem(p)
    envelope_c = 0.0 if lam == 0.0 else alpha(chain, 1) / lam

    pm = pi * m
    series_truncated = 0.0
    truncation_bound = 0.0
    terms = 0
    if envelope_c > 0.0 and lam > 0.0:
        pk = np.eye(n_states, dtype=np.longdouble)
        p_ld = p.astype(np.longdouble)
        pm_ld = pm.astype(np.longdouble)
        m_ld = m.astype(np.longdouble)
        acc = np.longdouble(0.0)
        while True:
            # Remaining lags contribute at most 2 * sum_{k>K} 4 alpha_k
            # by the mixing covariance inequality with |gt| <= 1, and
            # alpha_k <= C lam^k, so the tail is geometric.
            tail = 8.0 * envelope_c * lam ** (terms + 1) / (1.0 - lam)
            if tail <= tol / 2:
                truncation_bound = tail
                break
            if terms >= MAX_SERIES_TERMS:
                raise AnalyticError(
                    f"lag series did not certify below {tol / 2} within "
                    f"{MAX_SERIES_TERMS} terms (slem={lam})")
            pk = pk @ p_ld
            terms += 1
            acc += pm_ld @ pk @ m_ld
        series_truncated = float(acc)

    ones_pi = np.outer(np.ones(n_states), pi)
    z = np.linalg.inv(np.eye(n_states) - p + ones_pi)
    series_closed = float(pm @ (z - np.eye(n_states) + ones_pi) @ m)

    gap = abs(series_truncated - series_closed)
    if gap > tol:
        raise AnalyticError(
            f"lag-series routes disagree by {gap} (> {tol}): "
            f"truncated={series_truncated}, closed={series_closed}")

    value = e_gt2 + 2.0 * series_truncated
    if value < -tol:
        raise AnalyticError(f"rho2 = {value} is negative beyond tolerance")
    return Rho2Result(max(value, 0.0), truncation_bound, terms,
                      series_truncated, series_closed)


def rho2_iid(g: Callable[[float, float], float], nu: Discrete, mu: Measure,
             tol: float = 1e-10) -> float:
    """IID tilts: only the lag-zero term ``E[gt(V, U)^2]`` survives."""
    vals = np.asarray(nu.values)
    wts = np.asarray(nu.weights)

    def h(u: float) -> float:
        gs = np.array([g(float(v), u) for v in vals])
        gs = gs - math.fsum(wi * gi for wi, gi in zip(wts, gs))
        return math.fsum(wi * gi * gi for wi, gi in zip(wts, gs))

    value = expect(mu, h, tol)
    return max(value, 0.0)


def limit_report(w: WinFunction, proc: TiltingProcess, mu: Measure, s: float,
                 tol: float = 1e-10) -> LimitReport:
    """All limit quantities at strength ``s`` for one model instance.

    The tilt marginal must be finitely supported (that is automatic for
    finite chains; an IID process must carry a Discrete marginal here).
    """
    nu = marginal_measure(proc)
    if not isinstance(nu, Discrete):
        raise AnalyticError(
            "limit quantities need a finitely supported tilt marginal")
    k = Kernel(w, nu)
    ell_s = ell(w, nu, mu, s, tol)
    sig2 = sigma2(w, nu, mu, s, tol)

    def g(x: float, u: float) -> float:
        return F_s(k, s, x, u, tol / 4)

    if isinstance(proc, MarkovTilting):
        r = rho2_markov(g, proc, mu, tol)
        return LimitReport(s, ell_s, sig2, r.value, r.truncation_bound,
                           r.terms_used)
    rho = rho2_iid(g, nu, mu, tol)
    return LimitReport(s, ell_s, sig2, rho, 0.0, 0)


def curve(w: WinFunction, proc: TiltingProcess, mu: Measure,
          s_grid: Sequence[float], tol: float = 1e-10) -> list[LimitReport]:
    return [limit_report(w, proc, mu, float(s), tol) for s in s_grid]


def ell_ratio_uniform_closed_form(s: float, states: Sequence[float],
                                  weights: Sequence[float]) -> float:
    """Closed form of ell(s) for the ratio win function and mu = U[0, 1].

    With tilts supported on positive atoms ``v_i`` with weights ``w_i``,

        ell(s) = sum_{i,j} (s v_i / v_j) log(1 + v_j / (s v_i)) w_i w_j,

    and ell(0) = 0. Valid only for that win function and opponent-strength
    law; used as an independent cross-check of the quadrature route.
    """
    if s == 0.0:
        return 0.0
    return math.fsum(
        (s * vi / vj) * math.log1p(vj / (s * vi)) * wi * wj
        for vi, wi in zip(states, weights)
        for vj, wj in zip(states, weights))


@dataclass(frozen=True)
class BlockSchedule:
    """Big-block / small-block sizes for the dependent-CLT argument."""

    p: Callable[[int], int]
    q: Callable[[int], int]


def default_block_schedule() -> BlockSchedule:
    """p ~ sqrt(n)/loglog n and q ~ sqrt(n)/(loglog n)^2, floored sanely."""

    def p_of(n: int) -> int:
        lln = math.log(max(math.log(max(n, 3)), 1.0001))
        return max(min(int(math.sqrt(n) / lln), n), 2)

    def q_of(n: int) -> int:
        lln = math.log(max(math.log(max(n, 3)), 1.0001))
        return max(int(math.sqrt(n) / lln ** 2), 1)

    return BlockSchedule(p_of, q_of)


@dataclass(frozen=True)
class BlockConditionRow:
    n: int
    p: int
    q: int
    q_over_p: float
    p_over_n: float
    n_alpha_q_over_p: float
    weighted_alpha_sum: float


@dataclass(frozen=True)
class BlockConditionReport:
    """Two views per quantity: monotone decrease, and halving over the grid.

    A sequence like q/p under the default schedule shrinks as 1/loglog(n):
    strictly decreasing at every step, yet needing astronomically wide grids
    to halve. Conflating the two readings would either flag a theoretically
    sound schedule or pass a stalled one, so both are reported.
    """

    rows: tuple[BlockConditionRow, ...]
    decreasing: tuple[bool, bool, bool, bool]
    halved: tuple[bool, bool, bool, bool]
    valid_from: int | None

    QUANTITIES = ("q/p", "p/n", "n*alpha_q/p", "(p/n)*sum j*alpha_j")

    @property
    def all_decreasing(self) -> bool:
        return all(self.decreasing)

    @property
    def all_vanishing(self) -> bool:
        return all(self.halved)


def check_block_conditions(alpha_fn: Callable[[int], float],
                           sched: BlockSchedule,
                           n_grid: Sequence[int]) -> BlockConditionReport:
    """Numerically audit the four block-size conditions along ``n_grid``.

    The conditions require q/p, p/n, (n/p) alpha_q and (p/n) sum_{j<=p}
    j alpha_j to all vanish as n grows. A sequence counts as vanishing when
    its last entry is below half its first (identically zero sequences pass
    trivially). ``valid_from`` is the first grid point from which every
    sequence is weakly decreasing to the end.
    """
    rows = []
    alpha_cache: dict[int, float] = {}

    def a(j: int) -> float:
        if j not in alpha_cache:
            alpha_cache[j] = alpha_fn(j)
        return alpha_cache[j]

    for n in n_grid:
        p_n, q_n = sched.p(n), sched.q(n)
        if not 1 <= q_n <= p_n <= n:
            raise AnalyticError(
                f"block sizes must satisfy 1 <= q <= p <= n, got "
                f"p={p_n}, q={q_n} at n={n}")
        wsum = (p_n / n) * math.fsum(j * a(j) for j in range(1, p_n + 1))
        rows.append(BlockConditionRow(
            n, p_n, q_n, q_n / p_n, p_n / n, n * a(q_n) / p_n, wsum))

    def halved(xs: list[float]) -> bool:
        if all(x == 0.0 for x in xs):
            return True
        return xs[-1] < 0.5 * xs[0]

    def decreasing(xs: list[float]) -> bool:
        return all(b <= a + 1e-15 for a, b in zip(xs, xs[1:]))

    def monotone_from(xs: list[float]) -> int | None:
        start = 0
        for i in range(1, len(xs)):
            if xs[i] > xs[i - 1] + 1e-15:
                start = i
        return start if start < len(xs) else None

    cols = [
        [r.q_over_p for r in rows],
        [r.p_over_n for r in rows],
        [r.n_alpha_q_over_p for r in rows],
        [r.weighted_alpha_sum for r in rows],
    ]
    starts = [monotone_from(v) for v in cols]
    valid = None
    if all(s is not None for s in starts):
        valid = rows[max(s for s in starts if s is not None)].n
    return BlockConditionReport(
        tuple(rows),
        tuple(decreasing(v) for v in cols),
        tuple(halved(v) for v in cols),
        valid)
