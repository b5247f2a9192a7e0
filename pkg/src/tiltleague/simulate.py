"""Quenched league simulation.

The quenched protocol freezes the opponents' base strengths once, then
resamples tilting paths and match outcomes independently per replica. Team 0
is the focal team with deterministic strength ``s``; in focal mode it meets
team ``j`` in round ``j`` (canonical calendar) and only its own matches are
simulated, which needs just the focal tilt path and one tilt value per
opponent. Full mode plays every match of the circle calendar.

Reproducibility: all randomness derives from ``(master_seed, tag, indices)``
counter-based streams, so results are byte-identical for a given seed no
matter how replicas are chunked across worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .match_model import Kernel, WinFunction, WinFunctionError, eval_f, F_s
from .measures import Discrete, Measure, expect, sample
from .processes import (IIDTilting, MarkovTilting, TiltingProcess,
                        chain_states_batch, stationary_states_batch)
from .scheduling import circle_calendar
from .streams import substream

FOCAL_CHUNK = 1024


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuenchedEnvironment:
    """Frozen strengths: focal team 0 at ``focal_strength``, rest from mu."""

    two_n: int
    focal_strength: float
    strengths: np.ndarray
    mu: Measure
    master_seed: int

    def __post_init__(self):
        if self.two_n < 2 or self.two_n % 2 != 0:
            raise SimulationError(
                f"two_n must be even and >= 2, got {self.two_n}")
        arr = np.asarray(self.strengths, dtype=float)
        if arr.shape != (self.two_n - 1,):
            raise SimulationError(
                f"need {self.two_n - 1} opponent strengths, got {arr.shape}")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise SimulationError("opponent strengths must be finite and >= 0")
        if self.focal_strength < 0:
            raise SimulationError("focal strength must be >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "strengths", arr)


@dataclass(frozen=True)
class ReplicaResult:
    wins_focal: int
    wins_all: np.ndarray | None = None


def draw_environment(mu: Measure, two_n: int, s: float,
                     master_seed: int) -> QuenchedEnvironment:
    """Draw the opponents' strengths i.i.d. from mu on the strengths stream."""
    gen = substream(master_seed, "strengths")
    strengths = np.asarray(sample(mu, gen, size=two_n - 1), dtype=float)
    return QuenchedEnvironment(two_n, float(s), strengths, mu, master_seed)


def _tilt_rows_from_streams(proc: TiltingProcess, gens, length: int,
                            stationary_single: bool) -> np.ndarray:
    """Stack one tilt row per generator: chain paths or stationary draws.

    ``stationary_single`` selects independent stationary/marginal draws per
    entry (the opponents' single relevant day) instead of a path.
    """
    if isinstance(proc, MarkovTilting):
        u = np.stack([g.random(length) for g in gens])
        states = np.asarray(proc.states)
        if stationary_single:
            idx = stationary_states_batch(proc, u)
        else:
            idx = chain_states_batch(proc, u[:, 0], u[:, 1:])
        return states[idx]
    if isinstance(proc, IIDTilting):
        vals = np.empty((len(gens), length))
        for r, g in enumerate(gens):
            vals[r] = sample(proc.marginal, g, size=length)
        return vals
    raise SimulationError(f"not a tilting process: {proc!r}")


def _focal_chunk(env: QuenchedEnvironment, proc: TiltingProcess,
                 w: WinFunction, r_lo: int, r_hi: int) -> np.ndarray:
    length = env.two_n - 1
    seed = env.master_seed
    reps = range(r_lo, r_hi)
    tilt0 = _tilt_rows_from_streams(
        proc, [substream(seed, "focal-path", r) for r in reps], length, False)
    tiltj = _tilt_rows_from_streams(
        proc, [substream(seed, "opponent-tilts", r) for r in reps], length,
        True)
    u_out = np.stack(
        [substream(seed, "outcomes", r).random(length) for r in reps])
    x = env.focal_strength * tilt0
    y = env.strengths[None, :] * tiltj
    try:
        probs = eval_f(w, x, y)
    except WinFunctionError as exc:
        bad = np.argwhere((x == 0) & (y == 0))
        r_off, day = (int(bad[0][0]), int(bad[0][1])) if len(bad) else (0, 0)
        raise WinFunctionError(
            f"{exc} [replica={r_lo + r_off}, day={day + 1}, "
            f"pair=(0, {day + 1})]") from exc
    return (u_out < probs).sum(axis=1).astype(np.int64)


def _full_one(env: QuenchedEnvironment, proc: TiltingProcess, w: WinFunction,
              strengths_all: np.ndarray, idx_i: np.ndarray,
              idx_j: np.ndarray, r: int) -> np.ndarray:
    two_n = env.two_n
    length = two_n - 1
    seed = env.master_seed
    gens = [substream(seed, "replica", r, i) for i in range(two_n)]
    tilts = _tilt_rows_from_streams(proc, gens, length, False)
    u = substream(seed, "outcomes", r).random(idx_i.shape)
    day = np.broadcast_to(np.arange(length)[:, None], idx_i.shape)
    x = strengths_all[idx_i] * tilts[idx_i, day]
    y = strengths_all[idx_j] * tilts[idx_j, day]
    try:
        probs = eval_f(w, x, y)
    except WinFunctionError as exc:
        bad = np.argwhere((x == 0) & (y == 0))
        if len(bad):
            d, m = int(bad[0][0]), int(bad[0][1])
            pair = (int(idx_i[d, m]), int(idx_j[d, m]))
        else:
            d, pair = 0, (0, 0)
        raise WinFunctionError(
            f"{exc} [replica={r}, day={d + 1}, pair={pair}]") from exc
    winners = np.where(u < probs, idx_i, idx_j)
    return np.bincount(winners.ravel(), minlength=two_n).astype(np.int64)


def run_replicas(env: QuenchedEnvironment, proc: TiltingProcess,
                 w: WinFunction, replicas: int, mode: str = "focal",
                 threads: int = 1) -> list[ReplicaResult]:
    """Simulate ``replicas`` independent seasons against the frozen env.

    Focal mode returns only team 0's win counts; full mode plays the whole
    circle calendar with team 0's strength prepended to the opponent vector.
    Results are in replica-index order regardless of thread count.
    """
    if replicas < 1:
        raise SimulationError("replicas must be >= 1")
    if mode not in ("focal", "full"):
        raise SimulationError(f"mode must be 'focal' or 'full', got {mode!r}")

    if mode == "focal":
        bounds = [(lo, min(lo + FOCAL_CHUNK, replicas))
                  for lo in range(0, replicas, FOCAL_CHUNK)]
        chunks: list[np.ndarray] = [np.empty(0)] * len(bounds)

        def work(k: int) -> None:
            chunks[k] = _focal_chunk(env, proc, w, *bounds[k])

        if threads > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(work, range(len(bounds))))
        else:
            for k in range(len(bounds)):
                work(k)
        wins = np.concatenate(chunks)
        return [ReplicaResult(int(v)) for v in wins]

    cal = circle_calendar(env.two_n)
    idx_i = np.array([[p[0] for p in rnd] for rnd in cal.rounds])
    idx_j = np.array([[p[1] for p in rnd] for rnd in cal.rounds])
    strengths_all = np.concatenate(([env.focal_strength], env.strengths))

    results: list[np.ndarray] = [np.empty(0)] * replicas

    def work_full(r: int) -> None:
        results[r] = _full_one(env, proc, w, strengths_all, idx_i, idx_j, r)

    if threads > 1 and replicas > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work_full, range(replicas)))
    else:
        for r in range(replicas):
            work_full(r)
    return [ReplicaResult(int(wa[0]), wa) for wa in results]


def wins_focal_array(results: list[ReplicaResult]) -> np.ndarray:
    return np.array([r.wins_focal for r in results], dtype=np.int64)


def expected_wins_quenched(env: QuenchedEnvironment, nu: Measure,
                           w: WinFunction, tol: float = 1e-8) -> float:
    """Exact quenched mean of the focal win count.

    Conditionally on the strengths, the focal team's matches are independent
    Bernoullis, so the mean is the sum over opponents j of
    ``E[f(s V, s_j V')]`` with independent tilts V, V' from nu.
    """
    s = env.focal_strength
    if isinstance(nu, Discrete):
        vals = np.asarray(nu.values)
        wts = np.asarray(nu.weights)
        probs = eval_f(
            w,
            s * vals[None, :, None],
            env.strengths[:, None, None] * vals[None, None, :])
        per_opp = np.einsum("jab,a,b->j", probs, wts, wts)
        return float(per_opp.sum())
    k = Kernel(w, nu)
    per_term = tol / (2 * env.two_n)
    total = 0.0
    for sj in env.strengths:
        total += expect(nu, lambda v: F_s(k, s, v, float(sj), per_term),
                        per_term)
    return total


def ranking_curve(mu: Measure, two_n: int, proc: TiltingProcess,
                  w: WinFunction, replicas: int, master_seed: int,
                  threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Mean win fraction by strength rank over full-league replicas.

    All ``two_n`` strengths are drawn from mu (no deterministic focal team).
    Returns ``(sorted_strengths, mean_fraction)`` ascending in strength;
    fractions are normalized by 2n.
    """
    gen = substream(master_seed, "strengths")
    strengths = np.asarray(sample(mu, gen, size=two_n), dtype=float)
    env = QuenchedEnvironment(two_n, float(strengths[0]), strengths[1:], mu,
                              master_seed)
    results = run_replicas(env, proc, w, replicas, mode="full",
                           threads=threads)
    wins = np.stack([r.wins_all for r in results])
    order = np.argsort(strengths, kind="stable")
    mean_fraction = wins.mean(axis=0)[order] / two_n
    return strengths[order], mean_fraction
