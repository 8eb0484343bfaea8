"""Rational attacker: best response to a given system vulnerability.

The attacker makes y independent attempts at unit cost c, each breaching with
probability s, and collects G on at least one success:

    maximise  G (1 - (1 - s)^y) - c y   over y >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BreachModel, DomainError, _effort, effort

# |s - s_P| below this is treated as the deterrence boundary itself
BOUNDARY_EPS = 1e-12


@dataclass(frozen=True)
class AttackerParams:
    gain: float
    unit_cost: float

    def __post_init__(self):
        if not (self.gain > 0 and self.unit_cost > 0):
            raise ValueError("attacker gain and unit cost must be positive")
        if not math.isfinite(self.gain / self.unit_cost):
            raise ValueError("G/c must be finite")

    @property
    def ratio(self) -> float:
        """G/c, the largest effort a breach could ever justify."""
        return self.gain / self.unit_cost


@dataclass(frozen=True)
class AttackerResponse:
    s: float
    s_P: float
    y_star: float
    T_star: float
    net_gain: float

    @property
    def deterred(self) -> bool:
        return self.y_star == 0.0


def deterrence_threshold(params: AttackerParams) -> float:
    """s_P = 1 - exp(-c/G): at or below it the attacker does not attack."""
    return -math.expm1(-params.unit_cost / params.gain)


def _y_star(ratio: float, s_P: float, s):
    s = np.asarray(s, dtype=float)
    q = -np.log1p(-s)
    active = s - s_P > BOUNDARY_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(ratio * q) / q
    return np.where(active, np.maximum(y, 0.0), 0.0)


def _t_star(ratio: float, s_P: float, s):
    s = np.asarray(s, dtype=float)
    active = s - s_P > BOUNDARY_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        t = 1.0 + 1.0 / (ratio * np.log1p(-s))
    return np.where(active, np.maximum(t, 0.0), 0.0)


def optimal_effort(params: AttackerParams, s):
    """y*(s), vectorised over s in (0, 1)."""
    out = _y_star(params.ratio, deterrence_threshold(params), s)
    return float(out) if out.ndim == 0 else out


def breach_under_attack(params: AttackerParams, s):
    """T*(s), probability of breach when the attacker plays y*(s)."""
    out = _t_star(params.ratio, deterrence_threshold(params), s)
    return float(out) if out.ndim == 0 else out


def best_response(params: AttackerParams, s: float) -> AttackerResponse:
    if not 0.0 < s < 1.0:
        raise DomainError(f"system vulnerability must lie in (0, 1), got {s!r}")
    s_P = deterrence_threshold(params)
    y = float(_y_star(params.ratio, s_P, s))
    T = float(_t_star(params.ratio, s_P, s))
    return AttackerResponse(s, s_P, y, T, params.gain * T - params.unit_cost * y)


def peak_effort(params: AttackerParams) -> tuple[float, float]:
    """``(s_plus, y_plus)``: where y*(s) peaks and its value (G/c)/e."""
    s_plus = -math.expm1(-math.e * params.unit_cost / params.gain)
    return s_plus, params.ratio / math.e


@dataclass(frozen=True)
class DeterrencePrice:
    z_P: float
    s_P: float
    needed: bool


def price_of_deterrence(model: BreachModel, params: AttackerParams, v: float) -> DeterrencePrice:
    """Effort z_P = Z(s_P, v) that pushes vulnerability down to the deterrence threshold."""
    s_P = deterrence_threshold(params)
    if v <= s_P:
        return DeterrencePrice(0.0, s_P, needed=False)
    return DeterrencePrice(float(effort(model, s_P, v)), s_P, needed=True)


def peak_defense_effort(model: BreachModel, params: AttackerParams, v: float) -> float:
    """Z(s_plus, v): defender effort at which the attacker's effort peaks (0 if v <= s_plus)."""
    s_plus, _ = peak_effort(params)
    return 0.0 if v <= s_plus else float(effort(model, s_plus, v))


def attacker_curve(model: BreachModel, params: AttackerParams, v: float, samples: int = 200):
    """Rows ``(s, z, y_star, T_star, net_gain)`` for s on a uniform grid in (0, v]."""
    if not 0.0 < v < 1.0:
        raise DomainError(f"v must lie in (0, 1), got {v!r}")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    s = np.linspace(v / samples, v, samples)
    s_P = deterrence_threshold(params)
    y = _y_star(params.ratio, s_P, s)
    T = _t_star(params.ratio, s_P, s)
    z = np.where(s >= v, 0.0, _effort(model, s, v))
    gain = params.gain * T - params.unit_cost * y
    return [dict(s=a, z=b, y_star=c, T_star=d, net_gain=e)
            for a, b, c, d, e in zip(s.tolist(), z.tolist(), y.tolist(), T.tolist(), gain.tolist())]
