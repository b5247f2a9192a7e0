"""Derivative-free minimization: Nelder-Mead in a box, Halton multistarts.

Fully deterministic: no randomness anywhere, ties broken by insertion
order, so repeated runs give identical iterates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class OptimizeError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizeResult:
    x: np.ndarray
    fun: float
    evaluations: int
    converged: bool


def _clip(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.minimum(np.maximum(x, lo), hi)


def nelder_mead(objective: Callable[[np.ndarray], float], x0: Sequence[float],
                lo: Sequence[float], hi: Sequence[float],
                max_evals: int = 400, xtol: float = 1e-7,
                ftol: float = 1e-10) -> OptimizeResult:
    """Minimize inside the box ``[lo, hi]`` starting from ``x0``.

    Standard reflection/expansion/contraction/shrink coefficients
    (1, 2, 0.5, 0.5); every candidate is clipped into the box; the simplex
    restarts around the incumbent with shrunken steps when it collapses
    without meeting the tolerances.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x0 = _clip(np.asarray(x0, dtype=float), lo, hi)
    dim = len(x0)
    if not (len(lo) == len(hi) == dim) or np.any(lo >= hi):
        raise OptimizeError("box must satisfy lo < hi in every coordinate")

    evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        val = float(objective(x))
        return val if math.isfinite(val) else math.inf

    def init_simplex(centre: np.ndarray, scale: float):
        pts = [centre.copy()]
        for i in range(dim):
            step = scale * (hi[i] - lo[i])
            cand = centre.copy()
            cand[i] = cand[i] + step if cand[i] + step <= hi[i] else cand[i] - step
            pts.append(cand)
        vals = [f(p) for p in pts]
        return pts, vals

    scale = 0.10
    pts, vals = init_simplex(x0, scale)
    converged = False

    while evals < max_evals:
        order = sorted(range(dim + 1), key=lambda i: (vals[i], i))
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]

        f_spread = vals[-1] - vals[0]
        x_spread = max(float(np.max(np.abs(p - pts[0]))) for p in pts[1:])
        if f_spread <= ftol and x_spread <= xtol:
            converged = True
            break
        if x_spread <= xtol * 1e-3:
            # Degenerate simplex that still fails ftol: restart smaller.
            scale *= 0.5
            if scale < 1e-6:
                converged = True
                break
            pts, vals = init_simplex(pts[0], scale)
            continue

        centroid = np.mean(pts[:-1], axis=0)
        worst = pts[-1]
        refl = _clip(centroid + (centroid - worst), lo, hi)
        f_refl = f(refl)
        if f_refl < vals[0]:
            expd = _clip(centroid + 2.0 * (centroid - worst), lo, hi)
            f_expd = f(expd)
            if f_expd < f_refl:
                pts[-1], vals[-1] = expd, f_expd
            else:
                pts[-1], vals[-1] = refl, f_refl
        elif f_refl < vals[-2]:
            pts[-1], vals[-1] = refl, f_refl
        else:
            contr = _clip(centroid + 0.5 * (worst - centroid), lo, hi)
            f_contr = f(contr)
            if f_contr < vals[-1]:
                pts[-1], vals[-1] = contr, f_contr
            else:
                for i in range(1, dim + 1):
                    pts[i] = _clip(pts[0] + 0.5 * (pts[i] - pts[0]), lo, hi)
                    vals[i] = f(pts[i])

    order = sorted(range(dim + 1), key=lambda i: (vals[i], i))
    best = order[0]
    return OptimizeResult(pts[best], vals[best], evals, converged)


def _primes(count: int) -> list[int]:
    out, cand = [], 2
    while len(out) < count:
        if all(cand % p for p in out):
            out.append(cand)
        cand += 1
    return out


def halton(dim: int, count: int) -> np.ndarray:
    """First ``count`` points of the Halton sequence in the unit cube."""
    bases = _primes(dim)
    out = np.empty((count, dim))
    for j, b in enumerate(bases):
        for i in range(count):
            k, frac, val = i + 1, 1.0, 0.0
            while k:
                frac /= b
                val += frac * (k % b)
                k //= b
            out[i, j] = val
    return out


def multistart_points(lo: Sequence[float], hi: Sequence[float],
                      count: int) -> np.ndarray:
    """Box centre followed by ``count - 1`` Halton points scaled to the box."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    pts = [0.5 * (lo + hi)]
    if count > 1:
        unit = halton(len(lo), count - 1)
        pts.extend(lo + unit * (hi - lo))
    return np.stack(pts)
