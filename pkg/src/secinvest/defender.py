"""Defender's problem: choose the post-investment vulnerability s <= v.

The defender minimises

    Phi(s, v) = L T*(s) + d Z(s, v)

against an attacker that best-responds to s.  The sign of dPhi/ds is that of
R/f(v) - D(s), where D(s) = (1-s) log^2(1-s) / g(s) depends on s only and
R = (L/d)/(G/c).  Everything below is organised around the shape of D.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .attacker import AttackerParams, _t_star, deterrence_threshold
from .model import (BreachModel, DomainError, GammaTag, _effort, _f, _gamma, _s2_over_g,
                    classify_gamma, f_inverse)
from .numerics import NoBracketError, bisect

EPS = 1e-9           # bracket margin for the H and D root searches
S_CLAMP = 1e-12      # evaluation clamp near s = 0 and s = 1
ROOT_TOL = 1e-10
LOG_S_FLOOR = math.log(1e-300)


class ClassificationError(ValueError):
    """gamma(s) falls outside the class the shape results cover."""


@dataclass(frozen=True)
class DefenderParams:
    loss: float
    unit_cost: float

    def __post_init__(self):
        if not (self.loss > 0 and self.unit_cost > 0):
            raise ValueError("defender loss and unit cost must be positive")


@dataclass(frozen=True)
class Scenario:
    model: BreachModel
    attacker: AttackerParams
    defender: DefenderParams

    @classmethod
    def build(cls, model: BreachModel, L: float, G: float, c: float, d: float) -> "Scenario":
        return cls(model, AttackerParams(G, c), DefenderParams(L, d))

    @property
    def R(self) -> float:
        """Effective loss-to-gain ratio (L/d)/(G/c)."""
        return (self.defender.loss / self.defender.unit_cost) / self.attacker.ratio

    @property
    def s_P(self) -> float:
        return deterrence_threshold(self.attacker)

    def with_ratio(self, R: float) -> "Scenario":
        """Same model and attacker, defender loss rescaled so that the ratio is ``R``."""
        L = R * self.defender.unit_cost * self.attacker.ratio
        return Scenario(self.model, self.attacker, DefenderParams(L, self.defender.unit_cost))


class ShapeKind(str, enum.Enum):
    INVERTED_U = "InvertedU"
    STRICTLY_DECREASING = "StrictlyDecreasing"


@dataclass(frozen=True)
class GradientShape:
    kind: ShapeKind
    s_hat: float
    D_hat: float


class DecisionInterval(str, enum.Enum):
    DI1 = "DI1"
    DI2 = "DI2"
    DI3 = "DI3"


class Decision(str, enum.Enum):
    ALL_IN = "all in"
    SOME = "some"
    NONE = "none"


@dataclass(frozen=True)
class DefenderSolution:
    v: float
    decision_interval: DecisionInterval
    decision: Decision
    s_star: float
    z_star: float
    phi_star: float
    s1: Optional[float]
    s2: Optional[float]

    def as_row(self) -> dict:
        return dict(v=self.v, DI=self.decision_interval.value, decision=self.decision.value,
                    s_star=self.s_star, z_star=self.z_star, phi_star=self.phi_star,
                    s1=self.s1, s2=self.s2)


# --- universal pieces -----------------------------------------------------------

def universal_xi(s):
    """xi(s) = (1-s) log^2(1-s) / s, with xi(0) = xi(1) = 0."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (1.0 - s) * np.log1p(-s) ** 2 / s
    out = np.where((s <= 0) | (s >= 1), 0.0, out)
    return float(out) if out.ndim == 0 else out


def xi_slope(s):
    """Analytic derivative of xi."""
    s = np.asarray(s, dtype=float)
    lg = np.log1p(-s)
    out = -(lg ** 2 + 2.0 * lg) / s - (1.0 - s) * lg ** 2 / s ** 2
    return float(out) if out.ndim == 0 else out


def xi_gap(s):
    """s^2 - (1-s) log^2(1-s); positive on (0, 1) and zero at 0."""
    s = np.asarray(s, dtype=float)
    out = s ** 2 - (1.0 - s) * np.log1p(-s) ** 2
    return float(out) if out.ndim == 0 else out


def _hessian(gam, s):
    s = np.asarray(s, dtype=float)
    return -(2.0 / np.log1p(-s) + 1.0 / s) - gam * (1.0 / s - 1.0)


@functools.lru_cache(maxsize=None)
def xi_peak() -> tuple[float, float]:
    """``(s_xi, xi_hat)``: location and value of the maximum of xi.

    D = xi/alpha for gamma = 0, so the peak is the root of H(s; 0).
    """
    s_xi = bisect(lambda s: float(_hessian(0.0, s)), EPS, 1 - EPS, tol=1e-14)
    return s_xi, float(universal_xi(s_xi))


def class2_threshold() -> float:
    """alpha*R above which a GL class II model has a fixed point."""
    s_xi, xi_hat = xi_peak()
    return xi_hat / -math.log(s_xi)


# --- gradient function and its shape ----------------------------------------------

def _D(model: BreachModel, s):
    # (1-s) (log(1-s)/s)^2 (s^2/g), so that nothing underflows as s -> 0
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s > 0, np.log1p(-s) / s, -1.0)
    return (1.0 - s) * ratio ** 2 * _s2_over_g(model, s)


def gradient_function(scn: Scenario | BreachModel, s):
    """D(s) = (1-s) log^2(1-s) / g(s)."""
    model = scn.model if isinstance(scn, Scenario) else scn
    s_a = np.asarray(s, dtype=float)
    if np.any((s_a <= 0) | (s_a >= 1)):
        raise DomainError(f"s must lie in (0, 1), got {s!r}")
    out = _D(model, s_a)
    return float(out) if out.ndim == 0 else out


def hessian_surrogate(scn: Scenario | BreachModel, s):
    """H(s; gamma), which has the sign of dD/ds."""
    model = scn.model if isinstance(scn, Scenario) else scn
    s_a = np.asarray(s, dtype=float)
    if np.any((s_a <= 0) | (s_a >= 1)):
        raise DomainError(f"s must lie in (0, 1), got {s!r}")
    out = _hessian(_gamma(model, s_a), s_a)
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=256)
def _shape(model: BreachModel) -> GradientShape:
    cls = classify_gamma(model)
    if cls.tag is GammaTag.INVALID:
        raise ClassificationError(f"{model.describe()}: {cls.reason}")
    if float(_gamma(model, np.asarray(0.0))) > 1.0:
        return GradientShape(ShapeKind.STRICTLY_DECREASING, 0.0, math.inf)
    H = lambda s: float(_hessian(_gamma(model, np.asarray(s)), s))
    if H(EPS) <= 0.0:
        # gamma(0) = 1: the peak sits at s = 0 and D decreases from its limit there
        return GradientShape(ShapeKind.INVERTED_U, 0.0, float(_D(model, EPS)))
    s_hat = bisect(H, EPS, 1 - EPS, tol=ROOT_TOL)
    return GradientShape(ShapeKind.INVERTED_U, s_hat, float(_D(model, s_hat)))


def classify_gradient_shape(scn: Scenario | BreachModel) -> GradientShape:
    model = scn.model if isinstance(scn, Scenario) else scn
    return _shape(model)


def v_hat(scn: Scenario) -> float:
    """Smallest initial vulnerability admitting stationary points (1.0 when none does)."""
    shape = classify_gradient_shape(scn)
    if shape.kind is ShapeKind.STRICTLY_DECREASING:
        return 0.0
    return f_inverse(scn.model, scn.R / shape.D_hat)


def _root_near_zero(fn, hi: float) -> Optional[float]:
    """Root of a monotone ``fn`` on (0, hi], searching in log s below EPS; None if there is none."""
    try:
        return bisect(fn, EPS, hi, tol=ROOT_TOL)
    except NoBracketError:
        pass
    try:
        u = bisect(lambda u: fn(math.exp(u)), LOG_S_FLOOR, math.log(EPS), tol=1e-12)
    except NoBracketError:
        return None
    return math.exp(u)


def _root_near_one(fn, lo: float) -> float:
    """Root of a decreasing ``fn`` on [lo, 1), searching in log(1-s) above 1 - EPS.

    D vanishes at s = 1, so a root always exists; if it lies beyond double
    resolution the largest double below 1 stands in for it.
    """
    try:
        return bisect(fn, lo, 1 - EPS, tol=ROOT_TOL)
    except NoBracketError:
        pass
    top = math.nextafter(1.0, 0.0)
    if fn(top) > 0:
        return top
    w = bisect(lambda w: fn(-math.expm1(w)), math.log(EPS), math.log1p(-top), tol=1e-12)
    return -math.expm1(w)


def stationary_points(scn: Scenario, v: float) -> tuple[Optional[float], Optional[float]]:
    """``(s2, s1)``: local maximum and local minimum of Phi(., v), when they exist."""
    if not 0.0 < v < 1.0:
        raise DomainError(f"v must lie in (0, 1), got {v!r}")
    model = scn.model
    shape = classify_gradient_shape(scn)
    target = scn.R / float(_f(model, v))
    fn = lambda s: float(_D(model, s)) - target
    if shape.kind is ShapeKind.STRICTLY_DECREASING:
        # D diverges at 0, so the root exists, possibly far below EPS
        s1 = _root_near_one(fn, EPS) if fn(1 - EPS) > 0 else _root_near_zero(fn, 1 - EPS)
        return None, s1
    vh = v_hat(scn)
    if v < vh:
        return None, None
    if v == vh or target >= shape.D_hat:
        return shape.s_hat, shape.s_hat
    s1 = _root_near_one(fn, max(shape.s_hat, EPS))
    s2 = _root_near_zero(fn, shape.s_hat) if shape.s_hat > EPS else None
    return s2, s1


# --- objective --------------------------------------------------------------------

def _phi(scn: Scenario, s, v):
    s = np.clip(np.asarray(s, dtype=float), S_CLAMP, 1 - S_CLAMP)
    v = np.asarray(v, dtype=float)
    T = _t_star(scn.attacker.ratio, scn.s_P, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        Z = np.where(s >= v, 0.0, _effort(scn.model, s, v))
    return scn.defender.loss * T + scn.defender.unit_cost * Z


def objective(scn: Scenario, s, v):
    """Defender's expected loss plus effort cost, Phi(s, v)."""
    s_a = np.asarray(s, dtype=float)
    v_a = np.asarray(v, dtype=float)
    if np.any((v_a <= 0) | (v_a >= 1)):
        raise DomainError(f"v must lie in (0, 1), got {v!r}")
    if np.any(s_a <= 0) or np.any(s_a > v_a):
        raise DomainError(f"need 0 < s <= v, got s={s!r}, v={v!r}")
    out = _phi(scn, s_a, v_a)
    return float(out) if out.ndim == 0 else out


def attacked_objective(scn: Scenario, s, v):
    """Phi with T*(s) = 1 + 1/((G/c) log(1-s)) taken literally for every s.

    Agrees with :func:`objective` above s_P; its s-derivative carries the
    stationary-point sign pattern on all of (0, 1).
    """
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    T = 1.0 + 1.0 / (scn.attacker.ratio * np.log1p(-s))
    out = scn.defender.loss * T + scn.defender.unit_cost * _effort(scn.model, s, v)
    return float(out) if out.ndim == 0 else out


def decision_interval(scn: Scenario, v: float, s1: Optional[float] = None,
                      vh: Optional[float] = None) -> DecisionInterval:
    """Boundary cases go to the lower-numbered interval."""
    if vh is None:
        vh = v_hat(scn)
    if s1 is None or v <= vh:
        return DecisionInterval.DI1
    if v <= s1:
        return DecisionInterval.DI2
    return DecisionInterval.DI3


def solve_defender(scn: Scenario, v: float) -> DefenderSolution:
    """Optimal vulnerability s*(v) among the candidates of the decision interval.

    Ties between deterrence and the alternative go to deterrence ("all in").
    """
    if not 0.0 < v < 1.0:
        raise DomainError(f"v must lie in (0, 1), got {v!r}")
    s_P = scn.s_P
    s2, s1 = stationary_points(scn, v)
    di = decision_interval(scn, v, s1)
    d = scn.defender.unit_cost
    if v <= s_P:
        return DefenderSolution(v, di, Decision.ALL_IN, v, 0.0, 0.0, s1, s2)

    z_P = float(_effort(scn.model, s_P, v))
    best = (Decision.ALL_IN, s_P, d * z_P)
    alt = None
    if di is DecisionInterval.DI2:
        alt = (Decision.NONE, v)
    elif di is DecisionInterval.DI3 and s1 > s_P:
        alt = (Decision.SOME, s1)
    if alt is not None:
        phi_alt = float(_phi(scn, alt[1], v))
        if phi_alt < best[2]:
            best = (alt[0], alt[1], phi_alt)
    decision, s_star, _ = best
    z_star = 0.0 if s_star >= v else float(_effort(scn.model, s_star, v))
    return DefenderSolution(v, di, decision, s_star, z_star, float(_phi(scn, s_star, v)), s1, s2)
