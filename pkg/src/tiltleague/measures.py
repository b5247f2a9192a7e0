"""Probability measures on the nonnegative half-line.

Three concrete families cover everything the model needs: finite discrete
measures (atom/weight lists), uniform laws on an interval, and empirical
measures built from observed samples. Each supports seeded sampling,
expectation of bounded functions, and the generalized inverse CDF
``inf{y >= 0 : H(y) >= x}``.

Measure values are immutable after construction; randomness always comes in
through an explicit generator argument.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .quadrature import adaptive_simpson

# Weight sums farther than this from 1 are rejected; closer ones are
# renormalized silently (parsing round-off tolerance).
WEIGHT_SUM_TOL = 1e-6


class MeasureError(ValueError):
    """Invalid measure construction or use."""


@dataclass(frozen=True)
class Discrete:
    """Finite discrete measure: atoms ``values`` with probabilities ``weights``."""

    values: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) == 0:
            raise MeasureError("discrete measure needs at least one atom")
        if len(self.values) != len(self.weights):
            raise MeasureError(
                f"{len(self.values)} values but {len(self.weights)} weights")
        if any(v < 0 or not math.isfinite(v) for v in self.values):
            raise MeasureError(f"atom values must be finite and >= 0: {self.values}")
        if any(w < 0 or not math.isfinite(w) for w in self.weights):
            raise MeasureError(f"weights must be finite and >= 0: {self.weights}")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise MeasureError(
                f"weights sum to {total!r}, more than {WEIGHT_SUM_TOL} away from 1")
        if abs(total - 1.0) > 1e-15:
            object.__setattr__(
                self, "weights", tuple(w / total for w in self.weights))


@dataclass(frozen=True)
class UniformInterval:
    """Uniform law on ``[lo, hi]`` with ``0 <= lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi) or not math.isfinite(self.hi):
            raise MeasureError(
                f"uniform interval needs 0 <= lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Empirical:
    """Empirical measure: uniform draws with replacement from ``samples``."""

    samples: tuple[float, ...]

    def __post_init__(self):
        if len(self.samples) == 0:
            raise MeasureError("empirical measure needs at least one sample")
        if any(s < 0 or not math.isfinite(s) for s in self.samples):
            raise MeasureError("empirical samples must be finite and >= 0")


Measure = Union[Discrete, UniformInterval, Empirical]


def discrete(atoms: list[tuple[float, float]] | list[list[float]]) -> Discrete:
    """Build a Discrete measure from ``(value, weight)`` pairs."""
    if not atoms:
        raise MeasureError("discrete measure needs at least one atom")
    values = tuple(float(a[0]) for a in atoms)
    weights = tuple(float(a[1]) for a in atoms)
    return Discrete(values, weights)


def discrete_renormalized(atoms: list[tuple[float, float]]) -> Discrete:
    """Like :func:`discrete` but rescales any positive total mass to 1.

    Warns when the rescaling is more than round-off; used for published atom
    lists whose printed weights do not form a probability vector.
    """
    total = math.fsum(float(a[1]) for a in atoms)
    if not total > 0 or not math.isfinite(total):
        raise MeasureError(f"cannot renormalize weights with total {total!r}")
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        warnings.warn(
            f"discrete weights sum to {total:g}; renormalizing to 1",
            stacklevel=2)
    return Discrete(tuple(float(a[0]) for a in atoms),
                    tuple(float(a[1]) / total for a in atoms))


def sample(m: Measure, rng: np.random.Generator, size: int | None = None):
    """Draw from ``m`` using ``rng``. Scalar when ``size`` is None, else ndarray."""
    n = 1 if size is None else int(size)
    if isinstance(m, Discrete):
        idx = rng.choice(len(m.values), size=n, p=np.asarray(m.weights))
        out = np.asarray(m.values)[idx]
    elif isinstance(m, UniformInterval):
        out = m.lo + (m.hi - m.lo) * rng.random(n)
    elif isinstance(m, Empirical):
        idx = rng.integers(0, len(m.samples), size=n)
        out = np.asarray(m.samples)[idx]
    else:
        raise MeasureError(f"not a measure: {m!r}")
    return float(out[0]) if size is None else out


def expect(m: Measure, h: Callable[[float], float], tol: float = 1e-10) -> float:
    """Expectation of a bounded measurable ``h`` under ``m``.

    Discrete and empirical measures are exact weighted sums; the uniform
    interval integrates with adaptive Simpson to absolute error ``tol``.
    Quadrature failure propagates with the achieved error attached.
    """
    if isinstance(m, Discrete):
        return math.fsum(w * h(v) for v, w in zip(m.values, m.weights))
    if isinstance(m, UniformInterval):
        width = m.hi - m.lo
        return adaptive_simpson(h, m.lo, m.hi, tol * width) / width
    if isinstance(m, Empirical):
        return math.fsum(h(s) for s in m.samples) / len(m.samples)
    raise MeasureError(f"not a measure: {m!r}")


def cdf(m: Measure, y: float) -> float:
    """Distribution function ``H(y) = m([0, y])``."""
    if isinstance(m, Discrete):
        return math.fsum(w for v, w in zip(m.values, m.weights) if v <= y)
    if isinstance(m, UniformInterval):
        if y < m.lo:
            return 0.0
        if y >= m.hi:
            return 1.0
        return (y - m.lo) / (m.hi - m.lo)
    if isinstance(m, Empirical):
        return sum(1 for s in m.samples if s <= y) / len(m.samples)
    raise MeasureError(f"not a measure: {m!r}")


def inverse_cdf(m: Measure, x: float) -> float:
    """Generalized inverse ``inf{y >= 0 : H(y) >= x}`` for ``x in [0, 1]``.

    Right-continuous and nondecreasing in ``x``. Note that ``x = 0`` always
    maps to 0: every ``y >= 0`` satisfies ``H(y) >= 0``, so the infimum is 0
    regardless of where the support starts.
    """
    if not 0.0 <= x <= 1.0:
        raise MeasureError(f"inverse_cdf argument must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if isinstance(m, Discrete):
        order = sorted(range(len(m.values)), key=lambda i: m.values[i])
        acc = 0.0
        for i in order:
            acc += m.weights[i]
            if acc >= x:
                return m.values[i]
        return m.values[order[-1]]  # acc == 1 up to round-off
    if isinstance(m, UniformInterval):
        return m.lo + x * (m.hi - m.lo)
    if isinstance(m, Empirical):
        ordered = sorted(m.samples)
        n = len(ordered)
        return ordered[min(math.ceil(x * n), n) - 1]
    raise MeasureError(f"not a measure: {m!r}")


def load_samples_csv(path: str | Path) -> tuple[float, ...]:
    """Read a single-column CSV of nonnegative reals (optional header)."""
    out: list[float] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            cell = row[0].strip()
            try:
                out.append(float(cell))
            except ValueError:
                if out:
                    raise MeasureError(f"non-numeric sample {cell!r} in {path}")
                # else: header line, skip
    if not out:
        raise MeasureError(f"no samples found in {path}")
    return tuple(out)
