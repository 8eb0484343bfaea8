"""Small numerical helpers shared by the solvers."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import optimize

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoBracketError(ValueError):
    """Raised when a bisection interval does not bracket a sign change."""


def fd_step(x):
    """Finite-difference step: max(1e-6, 1e-4*|x|)."""
    return np.maximum(1e-6, 1e-4 * np.abs(x))


def central_diff(fn: Callable, x, h=None):
    """Central first difference of ``fn`` at ``x`` (vectorised)."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = fd_step(x)
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def bisect(fn: Callable[[float], float], lo: float, hi: float,
           tol: float = 1e-10, maxiter: int = 200) -> float:
    """Bisection root of a scalar function on ``[lo, hi]``.

    An endpoint that is an exact zero is returned directly.
    """
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoBracketError(f"no sign change on [{lo!r}, {hi!r}]")
    return optimize.bisect(fn, lo, hi, xtol=tol, maxiter=maxiter)


def golden_max(fn: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-10, maxiter: int = 500) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal function.

    Returns ``(argmax, max)``.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def grid_then_golden(fn: Callable, grid: np.ndarray, tol: float = 1e-10) -> tuple[float, float, int]:
    """Scan a vectorised ``fn`` on ``grid``, then refine the best cell by golden section.

    Returns ``(argmax, max, index_of_grid_max)``.
    """
    vals = np.asarray(fn(grid), dtype=float)
    i = int(np.nanargmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    x, fx = golden_max(lambda t: float(fn(np.asarray(t))), lo, hi, tol=tol)
    if fx < vals[i]:
        x, fx = float(grid[i]), float(vals[i])
    return float(x), float(fx), i
