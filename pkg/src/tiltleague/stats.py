"""Statistical validation: normality checks and uniform shift deviations.

Everything here is deterministic given its inputs; Monte Carlo inputs carry
their own seeds. Acceptance-style checks combine a one-sample
Kolmogorov-Smirnov statistic against a centred normal with a variance-ratio
check, since KS alone is insensitive to mild variance misspecification at a
few thousand samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analytic import LimitReport, rho2_iid, rho2_markov
from .match_model import WinFunction
from .measures import Discrete, Measure
from .processes import (MarkovTilting, TiltingProcess, chain_states_batch,
                        marginal_measure, states_from_uniform)
from .simulate import (QuenchedEnvironment, expected_wins_quenched,
                       run_replicas, wins_focal_array)
from .streams import substream

DEGENERATE_VAR = 1e-12


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class NormalityReport:
    sample_size: int
    sample_mean: float
    sample_var: float
    target_var: float
    ks_statistic: float
    ks_threshold: float
    var_ratio: float
    ks_pass: bool
    var_pass: bool
    passed: bool


def _normal_cdf(x: np.ndarray, variance: float) -> np.ndarray:
    scale = math.sqrt(2.0 * variance)
    return 0.5 * (1.0 + np.vectorize(math.erf)(np.asarray(x) / scale))


def ks_against_normal(samples: Sequence[float], variance: float,
                      var_tol: float = 0.1,
                      threshold: float | None = None) -> NormalityReport:
    """One-sample KS against N(0, variance) plus a variance-ratio check.

    Default threshold is the asymptotic 5-percent KS quantile
    ``1.36 / sqrt(sample_size)``.
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = len(xs)
    if n < 100:
        raise StatsError(f"need at least 100 samples, got {n}")
    if not (variance > 0.0 and math.isfinite(variance)):
        raise StatsError(f"variance must be finite and > 0, got {variance}")
    if threshold is None:
        threshold = 1.36 / math.sqrt(n)
    cdf = _normal_cdf(xs, variance)
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - cdf))
    d_minus = float(np.max(cdf - (grid - 1.0 / n)))
    ks = max(d_plus, d_minus)
    sample_var = float(np.var(xs, ddof=1))
    ratio = sample_var / variance
    ks_ok = ks <= threshold
    var_ok = abs(ratio - 1.0) <= var_tol
    return NormalityReport(n, float(np.mean(xs)), sample_var, variance, ks,
                           threshold, ratio, ks_ok, var_ok, ks_ok and var_ok)


def _degenerate_report(samples: np.ndarray, target_var: float,
                       threshold: float) -> NormalityReport:
    # A zero target variance is legitimate when the summand is centred to
    # nothing; then the check passes iff the samples are numerically zero.
    ok = bool(np.max(np.abs(samples), initial=0.0) <= 1e-9)
    return NormalityReport(len(samples), float(np.mean(samples)),
                           float(np.var(samples, ddof=1)), target_var,
                           0.0 if ok else 1.0, threshold, 1.0 if ok else 0.0,
                           ok, ok, ok)


def clt_check_wins(env: QuenchedEnvironment, proc: TiltingProcess,
                   w: WinFunction, replicas: int, report: LimitReport,
                   tol: float = 1e-8, threads: int = 1,
                   var_tol: float = 0.1) -> NormalityReport:
    """Test the standardized focal win count against N(0, sigma2 + rho2)."""
    if replicas < 1000:
        raise StatsError("CLT check needs at least 1000 replicas")
    results = run_replicas(env, proc, w, replicas, mode="focal",
                           threads=threads)
    wins = wins_focal_array(results)
    centre = expected_wins_quenched(env, marginal_measure(proc), w, tol)
    samples = (wins - centre) / math.sqrt(env.two_n)
    return ks_against_normal(samples, report.total_var, var_tol)


def _centred_g_table(g: Callable[[float, float], float], values: np.ndarray,
                     weights: np.ndarray, strengths: np.ndarray) -> np.ndarray:
    table = np.array([[g(float(v), float(sj)) for sj in strengths]
                      for v in values])
    return table - weights @ table


def clt_check_gsum(g: Callable[[float, float], float], proc: TiltingProcess,
                   mu: Measure, strengths: np.ndarray, replicas: int,
                   master_seed: int, tol: float = 1e-10,
                   var_tol: float = 0.1, chunk: int = 512) -> NormalityReport:
    """Direct check of the centred-sum CLT along one frozen strength vector.

    Per replica draws a fresh tilt path, forms
    ``sum_j gt(xi_j, s_j) / sqrt(2n)`` with ``gt`` the nu-centred kernel, and
    tests against the long-run variance from the lag series. Needs a finitely
    supported tilt marginal so the centring is exact.
    """
    if replicas < 1000:
        raise StatsError("CLT check needs at least 1000 replicas")
    strengths = np.asarray(strengths, dtype=float)
    length = len(strengths)
    two_n = length + 1
    nu = marginal_measure(proc)
    if not isinstance(nu, Discrete):
        raise StatsError("g-sum check needs a finitely supported tilt marginal")
    values = np.asarray(nu.values)
    weights = np.asarray(nu.weights)
    tg = _centred_g_table(g, values, weights, strengths)

    if isinstance(proc, MarkovTilting):
        target = rho2_markov(g, proc, mu, tol).value
    else:
        target = rho2_iid(g, nu, mu, tol)

    cum_weights = np.cumsum(weights)
    cum_weights[-1] = 1.0
    cols = np.arange(length)
    sums = np.empty(replicas)
    for lo in range(0, replicas, chunk):
        hi = min(lo + chunk, replicas)
        gens = [substream(master_seed, "gsum-path", r) for r in range(lo, hi)]
        u = np.stack([gen.random(length) for gen in gens])
        if isinstance(proc, MarkovTilting):
            paths = chain_states_batch(proc, u[:, 0], u[:, 1:])
        else:
            paths = states_from_uniform(cum_weights, u)
        sums[lo:hi] = tg[paths, cols].sum(axis=1)
    samples = sums / math.sqrt(two_n)

    threshold = 1.36 / math.sqrt(replicas)
    if target < DEGENERATE_VAR:
        return _degenerate_report(samples, target, threshold)
    return ks_against_normal(samples, target, var_tol)


@dataclass(frozen=True)
class ShiftDeviationReport:
    sample_size: int
    sup_dev: float
    eps_star: float
    concentration_ok: bool
    pair_estimate: float


def eps_star(n: int, bound_a: float, delta: float = 0.01) -> float:
    """Deviation level where the union tail bound 2n exp(-n e^2 / (18 A^2))
    drops to delta."""
    return math.sqrt(18.0 * bound_a ** 2 * math.log(2 * n / delta) / n)


def _shift_report(samples: np.ndarray, shifted_means: np.ndarray,
                  pair_est: float, bound_a: float,
                  delta: float) -> ShiftDeviationReport:
    n = len(samples) // 2
    sup_dev = float(np.max(np.abs(shifted_means - pair_est)))
    eps = eps_star(n, bound_a, delta)
    return ShiftDeviationReport(len(samples), sup_dev, eps, sup_dev <= eps,
                                pair_est)


def uniform_shift_deviation(samples: Sequence[float],
                            h: Callable[[np.ndarray, np.ndarray], np.ndarray],
                            bound_a: float,
                            delta: float = 0.01) -> ShiftDeviationReport:
    """Worst lagged-mean deviation sup_k |n^-1 sum_i h(X_i, X_{i+k}) - Eh|.

    ``Eh`` is estimated by the disjoint-pair U-statistic
    ``n^-1 sum_i h(X_{2i-1}, X_{2i})``, so the whole quantity is computable
    from the 2n samples alone. ``h`` must be vectorized and bounded by
    ``bound_a``; an observed violation raises.
    """
    xs = np.asarray(samples, dtype=float)
    if len(xs) < 4 or len(xs) % 2 != 0:
        raise StatsError("need an even number (>= 4) of samples")
    n = len(xs) // 2
    base = xs[:n]
    pair_vals = np.asarray(h(xs[0::2], xs[1::2]), dtype=float)
    if np.max(np.abs(pair_vals)) > bound_a * (1 + 1e-12):
        raise StatsError(f"h exceeds the declared bound {bound_a}")
    pair_est = float(np.mean(pair_vals))
    means = np.empty(n)
    for k in range(1, n + 1):
        vals = np.asarray(h(base, xs[k:k + n]), dtype=float)
        if np.max(np.abs(vals)) > bound_a * (1 + 1e-12):
            raise StatsError(f"h exceeds the declared bound {bound_a}")
        means[k - 1] = vals.mean()
    return _shift_report(xs, means, pair_est, bound_a, delta)


def product_shift_deviation(samples: Sequence[float], bound_a: float,
                            delta: float = 0.01) -> ShiftDeviationReport:
    """Fast path of uniform_shift_deviation for h(x, y) = x y.

    All n lagged sums are one linear cross-correlation, done by FFT. Agrees
    with the generic route to floating precision.
    """
    xs = np.asarray(samples, dtype=float)
    if len(xs) < 4 or len(xs) % 2 != 0:
        raise StatsError("need an even number (>= 4) of samples")
    if np.max(np.abs(xs)) ** 2 > bound_a * (1 + 1e-12):
        raise StatsError(f"h exceeds the declared bound {bound_a}")
    n = len(xs) // 2
    m = 1 << (3 * n - 1).bit_length()
    spec_base = np.fft.rfft(xs[:n], m)
    spec_all = np.fft.rfft(xs, m)
    corr = np.fft.irfft(spec_all * spec_base.conj(), m)
    means = corr[1:n + 1] / n
    pair_est = float(np.mean(xs[0::2] * xs[1::2]))
    return _shift_report(xs, means, pair_est, bound_a, delta)
