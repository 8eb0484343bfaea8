"""One-sided Gordon-Loeb investment: no strategic attacker.

The defender minimises L S(z, v) + d z over z >= 0.  Since S_z = -g(s)/f(v),
the first-order condition in vulnerability space is

    g(s) = d f(v) / L,

and g increasing in s makes the root unique.  Log-convexity of S in z makes
the objective convex, so the root (or z = 0 when g(v) <= d f(v)/L) is global.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .defender import Scenario, solve_defender
from .model import _effort, _f, _g, DomainError
from .numerics import bisect

LOG_S_FLOOR = math.log(1e-300)


@dataclass(frozen=True)
class GlBaselineSolution:
    v: float
    s_gl: float
    z_gl: float
    expected_loss: float
    bound_ratio: float       # d z_gl / (v L); at most 1/e for log-convex S


def solve_gordon_loeb(scn: Scenario, v: float) -> GlBaselineSolution:
    if not 0.0 < v < 1.0:
        raise DomainError(f"v must lie in (0, 1), got {v!r}")
    model = scn.model
    L, d = scn.defender.loss, scn.defender.unit_cost
    target = d * float(_f(model, v)) / L
    if float(_g(model, v)) <= target:
        return GlBaselineSolution(v, v, 0.0, L * v, 0.0)
    fn = lambda u: float(_g(model, math.exp(u))) - target
    s = math.exp(bisect(fn, LOG_S_FLOOR, math.log(v), tol=1e-14))
    z = float(_effort(model, s, v))
    return GlBaselineSolution(v, s, z, L * s + d * z, d * z / (v * L))


def compare_models(scn: Scenario, v_grid: Sequence[float]) -> list[dict]:
    """Per-v one-sided vs two-sided effort; ``exceeds`` marks z_two_sided > z_gl."""
    if len(v_grid) == 0:
        raise ValueError("empty v grid")
    rows = []
    for v in v_grid:
        gl = solve_gordon_loeb(scn, v)
        two = solve_defender(scn, v)
        rows.append(dict(v=v, z_gl=gl.z_gl, z_two_sided=two.z_star,
                         decision=two.decision.value, exceeds=two.z_star > gl.z_gl))
    return rows
