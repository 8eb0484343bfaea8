"""Transition vulnerabilities: solutions of s1(x) = x.

Since s1(v) solves D(s) = R/f(v) on the decreasing branch of D, the points
where s1(v) - v changes sign are the roots of

    D(x) f(x) = R,    s_hat < x < 1.

For GL class I this reads xi(x) = R alpha beta; for GL class II
xi(x) = -alpha R log x.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .defender import (EPS, DecisionInterval, Scenario, _D, classify_gradient_shape,
                       stationary_points, universal_xi, v_hat, xi_peak, xi_slope,
                       class2_threshold)
from .model import Check, CheckReport, Family, _f
from .numerics import bisect, golden_max, grid_then_golden

GRID_SIZE = 4096
FPE_TOL = 1e-12
MERGE_TOL = 1e-6


class WrongFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class PartitionInterval:
    lo: float
    hi: float
    sign: Optional[int]          # sign of s1(v) - v; None where s1 does not exist
    interval: DecisionInterval


@dataclass(frozen=True)
class FixedPointReport:
    s_hat: float
    v_hat: float
    v_L: Optional[float]
    v_H: Optional[float]
    R_c: float
    roots: tuple[float, ...] = ()
    tangent: tuple[bool, ...] = ()
    partition: tuple[PartitionInterval, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return dict(
            s_hat=self.s_hat, v_hat=self.v_hat, v_L=self.v_L, v_H=self.v_H,
            R_c=None if math.isinf(self.R_c) else self.R_c,
            R_c_unbounded=math.isinf(self.R_c),
            roots=list(self.roots), tangent=list(self.tangent),
            partition=[dict(lo=p.lo, hi=p.hi, sign=p.sign, interval=p.interval.value)
                       for p in self.partition],
        )


def _residual(scn: Scenario):
    """Vectorised residual whose zeros are the fixed points, in a well-scaled form."""
    model = scn.model
    if model.family is Family.GL1:
        level = scn.R * model.alpha * model.beta
        return lambda x: universal_xi(x) - level
    if model.family is Family.GL2:
        aR = model.alpha * scn.R
        return lambda x: universal_xi(x) + aR * np.log(x)
    R = scn.R
    return lambda x: (_D(model, x) * _f(model, x)) / R - 1.0


def fpe_grid(lo: float, hi: float, n: int = GRID_SIZE, eps: float = EPS) -> np.ndarray:
    """Uniform grid on (lo, hi), densified log-wise towards both ends."""
    width = hi - lo
    k = n // 8
    ends = np.geomspace(eps, 0.01 * width, k)
    grid = np.concatenate([lo + ends, np.linspace(lo + eps, hi - eps, n - 2 * k), hi - ends[::-1]])
    return np.unique(grid)


def _find_roots(fn, grid):
    vals = fn(grid)
    roots, tangent = [], []
    scalar = lambda x: float(fn(np.asarray(x)))
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(bisect(scalar, float(grid[i]), float(grid[i + 1]), tol=FPE_TOL))
        tangent.append(False)
    for i in np.nonzero(vals == 0.0)[0]:
        roots.append(float(grid[i]))
        tangent.append(False)
    # touching without crossing: an interior extremum of the residual reaching zero
    d = np.diff(vals)
    for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]:
        lo, hi = float(grid[i]), float(grid[i + 2])
        sgn = 1.0 if d[i] > 0 else -1.0
        x, fx = golden_max(lambda t: sgn * scalar(t), lo, hi, tol=1e-12)
        if abs(fx) <= 1e-12 * max(1.0, abs(vals[i])):
            roots.append(x)
            tangent.append(True)
    order = np.argsort(roots)
    roots = [roots[i] for i in order]
    tangent = [tangent[i] for i in order]
    merged_r, merged_t = [], []
    for r, t in zip(roots, tangent):
        if merged_r and r - merged_r[-1] < MERGE_TOL:
            merged_r[-1] = 0.5 * (merged_r[-1] + r)
            merged_t[-1] = True
        else:
            merged_r.append(r)
            merged_t.append(t)
    return merged_r, merged_t


def critical_ratio(scn: Scenario) -> float:
    """R_c = sup of D(x) f(x) on (0, 1); ``inf`` when unbounded towards x = 1.

    For any R > R_c the fixed-point equation has no solution.
    """
    model = scn.model
    prod = lambda x: _D(model, x) * _f(model, x)
    grid = fpe_grid(0.0, 1.0)
    with np.errstate(all="ignore"):
        vals = prod(grid)
    if int(np.nanargmax(vals)) == len(grid) - 1 or not np.isfinite(np.nanmax(vals)):
        return math.inf
    if model.family is Family.GL1:
        # refine on the xi scale, where the product is xi/(alpha beta)
        _, fx, _ = grid_then_golden(universal_xi, grid)
        return fx / (model.alpha * model.beta)
    _, fx, _ = grid_then_golden(prod, grid)
    return fx


def _partition(scn: Scenario, vh: float, roots) -> tuple[PartitionInterval, ...]:
    parts = []
    if vh >= 1.0:
        return (PartitionInterval(0.0, 1.0, None, DecisionInterval.DI1),)
    if vh > 0.0:
        parts.append(PartitionInterval(0.0, vh, None, DecisionInterval.DI1))
    edges = [vh] + [r for r in roots if r > vh] + [1.0]
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        _, s1 = stationary_points(scn, mid)
        if s1 is None:
            parts.append(PartitionInterval(lo, hi, None, DecisionInterval.DI1))
            continue
        sign = int(np.sign(s1 - mid))
        parts.append(PartitionInterval(lo, hi, sign,
                                       DecisionInterval.DI2 if sign > 0 else DecisionInterval.DI3))
    return tuple(parts)


def solve_fpe(scn: Scenario) -> FixedPointReport:
    """All fixed points on (s_hat, 1), labelled v_L < v_H, with the DI partition of (0, 1)."""
    shape = classify_gradient_shape(scn)
    vh = v_hat(scn)
    lo = max(shape.s_hat, 0.0)
    fn = _residual(scn)
    with np.errstate(all="ignore"):
        roots, tangent = _find_roots(fn, fpe_grid(lo, 1.0))
    roots = [r for r in roots if lo < r < 1.0]
    tangent = tangent[:len(roots)]
    v_L = v_H = None
    if len(roots) == 1:
        v_H = roots[0]
    elif len(roots) >= 2:
        v_L, v_H = roots[0], roots[-1]
    return FixedPointReport(
        s_hat=shape.s_hat, v_hat=vh, v_L=v_L, v_H=v_H, R_c=critical_ratio(scn),
        roots=tuple(roots), tangent=tuple(tangent),
        partition=_partition(scn, vh, roots),
    )


class Class1Count(str, enum.Enum):
    NONE_ABOVE = "NoneAbove"
    TWO = "Two"
    ONE = "One"


class Class2Count(str, enum.Enum):
    NONE = "None"
    ONE = "One"


def fixed_point_count_class1(scn: Scenario) -> Class1Count:
    """Number of fixed points of a GL class I model from R alpha beta alone."""
    model = scn.model
    if model.family is not Family.GL1:
        raise WrongFamilyError("class I count needs a GL class I model")
    level = scn.R * model.alpha * model.beta
    _, xi_hat = xi_peak()
    if level >= xi_hat:
        return Class1Count.NONE_ABOVE
    s_hat = classify_gradient_shape(scn).s_hat
    if level > universal_xi(s_hat):
        return Class1Count.TWO
    return Class1Count.ONE


def fixed_point_count_class2(scn: Scenario) -> Class2Count:
    model = scn.model
    if model.family is not Family.GL2:
        raise WrongFamilyError("class II count needs a GL class II model")
    if model.alpha * scn.R <= class2_threshold():
        return Class2Count.NONE
    return Class2Count.ONE


def class1_transition_properties(scn: Scenario) -> CheckReport:
    """Numerical checks of the relations behind the class I fixed-point count."""
    model = scn.model
    if model.family is not Family.GL1 or model.beta < 1.0:
        raise WrongFamilyError("needs GL class I with beta >= 1")
    shape = classify_gradient_shape(scn)
    if shape.s_hat <= EPS:
        return CheckReport((), skipped="peak of D at s = 0 (beta = 1); relations degenerate")
    beta = model.beta
    level = scn.R * model.alpha * beta
    s_hat = shape.s_hat
    vh = v_hat(scn)
    s_xi, xi_hat = xi_peak()
    xi_s = float(universal_xi(s_hat))
    checks = []

    if vh < 1.0:
        _, s1 = stationary_points(scn, vh)
        ok = s1 is not None and abs(s1 - s_hat) <= 1e-8
        checks.append(Check("s1(v_hat) = s_hat", ok, f"s1={s1!r}, s_hat={s_hat:.10g}"))
        ordered = (s_hat < vh) == (xi_s < level)
        checks.append(Check("s_hat < v_hat iff xi(s_hat) < R alpha beta", ordered,
                            f"s_hat={s_hat:.6g}, v_hat={vh:.6g}"))
        rhs = level * (s_hat / vh) ** (1.0 / beta)
        checks.append(Check("xi(s_hat) = R alpha beta (s_hat/v_hat)^(1/beta)",
                            abs(xi_s - rhs) <= 1e-9 * max(1.0, xi_s), f"{xi_s:.12g} vs {rhs:.12g}"))

    checks.append(Check("s_hat < s_xi and xi(s_hat) < xi_hat", s_hat < s_xi and xi_s < xi_hat,
                        f"s_hat={s_hat:.6g}, s_xi={s_xi:.6g}"))
    # D = xi / (alpha beta s^(1/beta)), so D'(s_hat) = 0 gives xi'(s_hat) = xi(s_hat)/(beta s_hat)
    slope = float(xi_slope(s_hat))
    want = xi_s / (beta * s_hat)
    checks.append(Check("xi'(s_hat) = xi(s_hat)/(beta s_hat)", abs(slope - want) <= 1e-6,
                        f"{slope:.10g} vs {want:.10g}"))

    if level < xi_hat:
        g = lambda x: float(universal_xi(x)) - level
        xi_2 = bisect(g, EPS, s_xi, tol=1e-13)
        xi_1 = bisect(g, s_xi, 1 - EPS, tol=1e-13)
        two = s_hat < xi_2
        checks.append(Check("case split matches xi(s_hat) vs R alpha beta", two == (xi_s < level),
                            f"xi_2={xi_2:.6g}, s_hat={s_hat:.6g}"))
        roots = solve_fpe(scn).roots
        expected = (xi_2, xi_1) if two else (xi_1,)
        ok = len(roots) == len(expected) and all(abs(a - b) <= 1e-8 for a, b in zip(roots, expected))
        checks.append(Check("fixed points are the admissible roots of xi = R alpha beta", ok,
                            f"found {roots}, expected {expected}"))
    return CheckReport(tuple(checks))
