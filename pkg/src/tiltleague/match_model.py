"""Win functions and the strength-averaged kernels built from them.

A win function maps a pair of day-strengths to the first player's win
probability. All supported families satisfy ``f(x, y) + f(y, x) = 1`` (no
draws) and are weakly increasing in the first argument. Everything here is
pure and accepts numpy arrays anywhere a scalar is allowed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .measures import Measure, expect


class WinFunctionError(ValueError):
    """Win probability requested outside the function's domain."""


@dataclass(frozen=True)
class Ratio:
    """f(x, y) = x / (x + y). Undefined at (0, 0); that case raises."""


@dataclass(frozen=True)
class ConstantHalf:
    """Every match is a fair coin regardless of strengths."""


@dataclass(frozen=True)
class TransformedRatio:
    """Ratio of saturating log transforms.

    ``f(x, y) = g(x) / (g(x) + g(y))`` with ``g(x) = log(1 - min(x/c1, c2))``.
    Arguments above ``c1 * c2`` saturate; that is intended behaviour of the
    family, not an error. Requires ``c1 > 0`` and ``c2 in (0, 1)``.
    """

    c1: float = 1.3
    c2: float = 0.999

    def __post_init__(self):
        if not self.c1 > 0:
            raise WinFunctionError(f"c1 must be > 0, got {self.c1}")
        if not 0.0 < self.c2 < 1.0:
            raise WinFunctionError(f"c2 must be in (0, 1), got {self.c2}")


@dataclass(frozen=True)
class Table:
    """Grid of win probabilities, bilinear-interpolated and clamped to [0, 1].

    Exists for calibration experiments against tabulated data; unlike the
    parametric families it is only approximately antisymmetric (up to the
    interpolation error of the grid it was built from).
    """

    x_grid: tuple[float, ...]
    y_grid: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        xs, ys = np.asarray(self.x_grid), np.asarray(self.y_grid)
        if len(xs) < 2 or len(ys) < 2:
            raise WinFunctionError("table needs at least a 2x2 grid")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise WinFunctionError("table grid coordinates must be increasing")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(xs), len(ys)):
            raise WinFunctionError(
                f"table values shape {vals.shape} does not match grid "
                f"({len(xs)}, {len(ys)})")
        if np.any(vals < 0) or np.any(vals > 1):
            raise WinFunctionError("table values must lie in [0, 1]")


WinFunction = Union[Ratio, ConstantHalf, TransformedRatio, Table]


def table_from_csv(path: str | Path) -> Table:
    """Load a Table: header row of y-values, first column x-values."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if len(rows) < 3:
        raise WinFunctionError(f"table file {path} is too small")
    y_grid = tuple(float(c) for c in rows[0][1:])
    x_grid = tuple(float(r[0]) for r in rows[1:])
    values = tuple(tuple(float(c) for c in r[1:]) for r in rows[1:])
    return Table(x_grid, y_grid, values)


def _bilinear(table: Table, x, y):
    xs = np.asarray(table.x_grid)
    ys = np.asarray(table.y_grid)
    vals = np.asarray(table.values, dtype=float)
    x = np.clip(x, xs[0], xs[-1])
    y = np.clip(y, ys[0], ys[-1])
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
    j = np.clip(np.searchsorted(ys, y, side="right") - 1, 0, len(ys) - 2)
    tx = (x - xs[i]) / (xs[i + 1] - xs[i])
    ty = (y - ys[j]) / (ys[j + 1] - ys[j])
    out = (vals[i, j] * (1 - tx) * (1 - ty) + vals[i + 1, j] * tx * (1 - ty)
           + vals[i, j + 1] * (1 - tx) * ty + vals[i + 1, j + 1] * tx * ty)
    return np.clip(out, 0.0, 1.0)


def eval_f(w: WinFunction, x, y):
    """Win probability of the first player at day-strengths ``(x, y)``.

    Accepts scalars or broadcastable numpy arrays; returns the matching
    shape. Raises WinFunctionError on negative inputs and on the undefined
    0-vs-0 match for the ratio families.
    """
    # Scalar fast path: quadrature and optimizer loops call this with plain
    # floats millions of times, where ndarray dispatch would dominate.
    if isinstance(x, (int, float)) and isinstance(y, (int, float)):
        if x < 0 or y < 0:
            raise WinFunctionError("strengths must be >= 0")
        if isinstance(w, ConstantHalf):
            return 0.5
        if isinstance(w, Ratio):
            if x == 0 and y == 0:
                raise WinFunctionError(
                    "ratio win function is undefined at (0, 0)")
            return x / (x + y)
        if isinstance(w, TransformedRatio):
            if x == 0 and y == 0:
                raise WinFunctionError(
                    "transformed-ratio win function is undefined at (0, 0)")
            gx = math.log1p(-min(x / w.c1, w.c2))
            gy = math.log1p(-min(y / w.c1, w.c2))
            return gx / (gx + gy)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise WinFunctionError("strengths must be >= 0")
    if isinstance(w, ConstantHalf):
        out = np.broadcast_arrays(x, y)[0] * 0.0 + 0.5
        return float(out) if out.ndim == 0 else out
    if isinstance(w, Ratio):
        if np.any((x == 0) & (y == 0)):
            raise WinFunctionError("ratio win function is undefined at (0, 0)")
        out = x / (x + y)
        return float(out) if out.ndim == 0 else out
    if isinstance(w, TransformedRatio):
        if np.any((x == 0) & (y == 0)):
            raise WinFunctionError(
                "transformed-ratio win function is undefined at (0, 0)")
        gx = np.log1p(-np.minimum(x / w.c1, w.c2))
        gy = np.log1p(-np.minimum(y / w.c1, w.c2))
        out = gx / (gx + gy)
        return float(out) if out.ndim == 0 else out
    if isinstance(w, Table):
        out = _bilinear(w, x, y)
        return float(out) if out.ndim == 0 else out
    raise WinFunctionError(f"not a win function: {w!r}")


@dataclass(frozen=True)
class Kernel:
    """A win function together with the tilt marginal (the law of V')."""

    win: WinFunction
    nu: Measure


def F_s(k: Kernel, s: float, x: float, y: float, tol: float = 1e-10) -> float:
    """Opponent-tilt average ``E[f(s x, y V')]`` with ``V' ~ nu``."""
    return expect(k.nu, lambda vp: eval_f(k.win, s * x, y * vp), tol)


def F_tilde_s(k: Kernel, s: float, x: float, y: float,
              tol: float = 1e-10) -> float:
    """Centered kernel ``F_s(x, y) - E[F_s(V, y)]`` with ``V ~ nu``.

    For every fixed y this has nu-mean zero in x, up to twice the requested
    tolerance (one tolerance per F_s evaluation layer).
    """
    own = F_s(k, s, x, y, tol / 2)
    centre = expect(k.nu, lambda v: F_s(k, s, v, y, tol / 4), tol / 4)
    return own - centre


def G_s(k: Kernel, s: float, x: float, tol: float = 1e-10) -> float:
    """Fully averaged win rate ``E[f(s V, x V')]`` with independent V, V' ~ nu."""
    return expect(k.nu, lambda v: F_s(k, s, v, x, tol / 2), tol / 2)


def check_antisymmetry(w: WinFunction, grid: np.ndarray,
                       tol: float = 1e-12) -> float:
    """Verify f(x,y) + f(y,x) = 1 over ``grid x grid``.

    Returns the largest deviation found; raises if it exceeds ``tol``.
    Tabulated win functions are only as antisymmetric as their grid, so
    callers pass an interpolation-error tolerance for those.
    """
    gx, gy = np.meshgrid(grid, grid)
    total = eval_f(w, gx, gy) + eval_f(w, gy, gx)
    dev = float(np.max(np.abs(total - 1.0)))
    if dev > tol:
        raise WinFunctionError(
            f"f(x,y) + f(y,x) deviates from 1 by {dev:.3e} (tol {tol:.3e})")
    return dev
