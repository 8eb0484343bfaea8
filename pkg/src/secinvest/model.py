"""Breach-probability and effort function families.

A :class:`BreachModel` bundles the system breach probability S(z, v), its
inverse in z (the effort function Z(s, v)), the factored marginal effort
Z_s(s, v) = -f(v)/g(s) and the log-convexity profile gamma(s).

Three families are supported:

* ``gl1``  S = v / (alpha z + 1)^beta,   gamma = 1/beta
* ``gl2``  S = v^(alpha z + 1),          gamma = 0
* ``custom``  gamma(s) given directly; g is rebuilt from gamma with g(1) = alpha
  and f(v) = 1 / int_v^1 dt/g_hat(t), which reduces to ``gl2`` when gamma = 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from ._profile import ProfileIntegrator
from .numerics import bisect, fd_step

GRID_MARGIN = 1e-4


class DomainError(ValueError):
    """An argument lies outside the domain of a model function."""


class Family(str, enum.Enum):
    GL1 = "gl1"
    GL2 = "gl2"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PolynomialProfile:
    """gamma(s) = sum_k coeffs[k] s^k (lowest degree first)."""

    coeffs: tuple[float, ...]

    def __call__(self, s):
        return npoly.polyval(np.asarray(s, dtype=float), self.coeffs)

    def __str__(self):
        return ",".join(repr(c) for c in self.coeffs)


@dataclass(frozen=True)
class BreachModel:
    family: Family
    alpha: float
    beta: float = 1.0
    gamma_profile: Optional[Callable] = None
    _profile: Optional[ProfileIntegrator] = field(default=None, init=False, repr=False,
                                                  compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha!r}")
        if self.family is Family.GL1 and not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if self.family is Family.CUSTOM:
            if self.gamma_profile is None:
                raise ValueError("custom family needs a gamma profile")
            object.__setattr__(self, "_profile", ProfileIntegrator(self.gamma_profile))

    @classmethod
    def gl1(cls, alpha: float, beta: float) -> "BreachModel":
        return cls(Family.GL1, float(alpha), float(beta))

    @classmethod
    def gl2(cls, alpha: float) -> "BreachModel":
        return cls(Family.GL2, float(alpha))

    @classmethod
    def custom(cls, alpha: float, profile: Callable) -> "BreachModel":
        return cls(Family.CUSTOM, float(alpha), gamma_profile=profile)

    @classmethod
    def polynomial(cls, alpha: float, coeffs: Sequence[float]) -> "BreachModel":
        return cls.custom(alpha, PolynomialProfile(tuple(float(c) for c in coeffs)))

    def describe(self) -> str:
        if self.family is Family.GL1:
            return f"GL class I (alpha={self.alpha:g}, beta={self.beta:g})"
        if self.family is Family.GL2:
            return f"GL class II (alpha={self.alpha:g})"
        return f"custom gamma (alpha={self.alpha:g}, gamma={self.gamma_profile})"


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


# --- raw (unchecked, vectorised) kernels -------------------------------------------

def _breach(model: BreachModel, z, v):
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    if model.family is Family.GL1:
        return v / (model.alpha * z + 1.0) ** model.beta
    if model.family is Family.GL2:
        return v ** (model.alpha * z + 1.0)
    z, v = np.broadcast_arrays(z, v)
    out = np.zeros(z.shape)
    pos = v > 0
    if np.any(pos):
        target = (model.alpha * z[pos] + 1.0) * model._profile.cum_inverse(v[pos])
        out[pos] = model._profile.invert_cum(target)
    return out


def _effort(model: BreachModel, s, v):
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    a = model.alpha
    if model.family is Family.GL1:
        return ((v / s) ** (1.0 / model.beta) - 1.0) / a
    if model.family is Family.GL2:
        return (np.log(s) / np.log(v) - 1.0) / a
    W = model._profile.cum_inverse
    return (W(s) / W(v) - 1.0) / a


def _f(model: BreachModel, v):
    v = np.asarray(v, dtype=float)
    if model.family is Family.GL1:
        return v ** (1.0 / model.beta)
    if model.family is Family.GL2:
        with np.errstate(divide="ignore"):
            return -1.0 / np.log(v)
    with np.errstate(divide="ignore"):
        return 1.0 / model._profile.cum_inverse(v)


def _g(model: BreachModel, s):
    s = np.asarray(s, dtype=float)
    a = model.alpha
    if model.family is Family.GL1:
        b = model.beta
        return a * b * s ** ((b + 1.0) / b)
    if model.family is Family.GL2:
        return a * s
    return a * np.exp(model._profile.log_g(s))


def _s2_over_g(model: BreachModel, s):
    """s^2 / g(s), evaluated without forming g so it stays finite for tiny s."""
    s = np.asarray(s, dtype=float)
    a = model.alpha
    with np.errstate(divide="ignore"):
        if model.family is Family.GL1:
            return s ** (1.0 - 1.0 / model.beta) / (a * model.beta)
        if model.family is Family.GL2:
            return s / a
        return np.exp(2.0 * np.log(s) - model._profile.log_g(s)) / a


def _gamma(model: BreachModel, s):
    s = np.asarray(s, dtype=float)
    if model.family is Family.GL1:
        return np.full(s.shape, 1.0 / model.beta)
    if model.family is Family.GL2:
        return np.zeros(s.shape)
    return np.asarray(model.gamma_profile(s), dtype=float) * np.ones(s.shape)


def f_inverse(model: BreachModel, y: float) -> float:
    """Initial vulnerability v with f(v) = y, clamped to 1 when y >= f(1)."""
    if y <= 0:
        return 0.0
    if model.family is Family.GL1:
        return min(1.0, y ** model.beta)
    if model.family is Family.GL2:
        return math.exp(-1.0 / y)
    # f(1) is infinite; W is decreasing from W(0+) to 0
    target = 1.0 / y
    return float(model._profile.invert_cum(target))


# --- public operations ----------------------------------------------------------

def breach_probability(model: BreachModel, z, v):
    """System breach probability S(z, v) after effort ``z`` from initial ``v``."""
    z_a = np.asarray(z, dtype=float)
    v_a = np.asarray(v, dtype=float)
    if np.any((v_a < 0) | (v_a > 1)) or np.any(np.isnan(v_a)):
        raise DomainError(f"initial vulnerability must lie in [0, 1], got {v!r}")
    if np.any(z_a < 0) or np.any(np.isnan(z_a)):
        raise DomainError(f"effort must be non-negative, got {z!r}")
    out = np.where(z_a == 0, v_a, _breach(model, z_a, v_a))
    return _scalar_or_array(out)


def effort(model: BreachModel, s, v):
    """Effort Z(s, v) needed to bring vulnerability ``v`` down to ``s``."""
    s_a = np.asarray(s, dtype=float)
    v_a = np.asarray(v, dtype=float)
    if np.any(s_a <= 0) or np.any(v_a > 1) or np.any(np.isnan(s_a)):
        raise DomainError(f"need 0 < s <= v <= 1, got s={s!r}, v={v!r}")
    if np.any(s_a > v_a):
        raise DomainError(f"effort cannot increase vulnerability (s={s!r} > v={v!r})")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(s_a == v_a, 0.0, _effort(model, s_a, v_a))
    return _scalar_or_array(out)


def _check_open_unit(name, x):
    x_a = np.asarray(x, dtype=float)
    if np.any(~((x_a > 0) & (x_a < 1))):
        raise DomainError(f"{name} must lie in (0, 1), got {x!r}")
    return x_a


def factor_f(model: BreachModel, v):
    """The v-dependent factor f(v) of the marginal effort."""
    return _scalar_or_array(_f(model, _check_open_unit("v", v)))


def factor_g(model: BreachModel, s):
    """The s-dependent factor g(s) of the marginal effort."""
    return _scalar_or_array(_g(model, _check_open_unit("s", s)))


def marginal_factors(model: BreachModel, s, v):
    """``(f(v), g(s))`` with dZ/ds = -f(v)/g(s)."""
    return factor_f(model, v), factor_g(model, s)


def gamma(model: BreachModel, s):
    """Log-convexity profile gamma(s); s in [0, 1]."""
    s_a = np.asarray(s, dtype=float)
    if np.any((s_a < 0) | (s_a > 1)):
        raise DomainError(f"s must lie in [0, 1], got {s!r}")
    return _scalar_or_array(_gamma(model, s_a))


# --- gamma classification -------------------------------------------------------

class GammaTag(str, enum.Enum):
    GAMMA1 = "Gamma1"
    GAMMA2 = "Gamma2"
    GENERAL = "GammaGeneral"
    INVALID = "Invalid"


@dataclass(frozen=True)
class GammaClass:
    tag: GammaTag
    crossover: Optional[float] = None
    reason: str = ""

    @property
    def valid(self) -> bool:
        return self.tag is not GammaTag.INVALID


def unit_grid(n: int, margin: float = GRID_MARGIN) -> np.ndarray:
    return np.linspace(margin, 1.0 - margin, n)


def classify_gamma(model: BreachModel, grid_size: int = 256, tol: float = 1e-12) -> GammaClass:
    """Place gamma(s) in Gamma1, Gamma2 or the single-crossover class."""
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    s = unit_grid(grid_size)
    gam = _gamma(model, s)
    if np.any(gam < -tol):
        i = int(np.argmax(gam < -tol))
        return GammaClass(GammaTag.INVALID, reason=f"gamma({s[i]:.4g}) = {gam[i]:.4g} < 0")
    low = gam <= 1.0 + tol
    # where gamma <= 1 it must not decrease
    drops = low[:-1] & (np.diff(gam) < -tol)
    if np.any(drops):
        i = int(np.argmax(drops))
        return GammaClass(GammaTag.INVALID, reason=f"gamma <= 1 but decreasing near s={s[i]:.4g}")
    if np.all(low):
        return GammaClass(GammaTag.GAMMA1)
    if not np.any(low):
        return GammaClass(GammaTag.GAMMA2)
    above = ~low
    ups = np.nonzero(low[:-1] & above[1:])[0]
    downs = np.nonzero(above[:-1] & low[1:])[0]
    if len(downs) or len(ups) != 1:
        return GammaClass(GammaTag.INVALID, reason="gamma crosses 1 more than once")
    i = int(ups[0])
    fn = lambda t: float(_gamma(model, np.asarray(t))) - 1.0
    try:
        sc = bisect(fn, float(s[i]), float(s[i + 1]), tol=1e-12)
    except ValueError:
        sc = float(s[i + 1])
    return GammaClass(GammaTag.GENERAL, crossover=sc)


# --- assumption validation ------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class CheckReport:
    checks: tuple[Check, ...]
    skipped: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        out = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}".rstrip() for c in self.checks]
        if self.skipped:
            out.append(f"SKIP  {self.skipped}")
        return out


def _sign_check(name, values, want, where):
    values = np.asarray(values, dtype=float)
    bad = ~(values < 0) if want < 0 else ~(values > 0)
    if np.any(bad):
        i = int(np.argmax(bad.ravel()))
        return Check(name, False, f"{np.count_nonzero(bad)} violations, e.g. {where(i)} -> {values.ravel()[i]:.4g}")
    return Check(name, True)


def validate_assumptions(model: BreachModel, grid_size: int = 256) -> CheckReport:
    """Numerically check the structural assumptions on S and Z over a grid.

    Derivatives in z are taken in the scaled effort w = alpha*z, which every
    family depends on, so the step size does not depend on alpha.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    a = model.alpha
    v1 = unit_grid(grid_size)
    m = max(16, grid_size // 8)
    v2 = unit_grid(m)
    rho = np.geomspace(1e-3, 1.0 - 1e-3, m)
    V, P = np.meshgrid(v2, rho, indexing="ij")
    Sg = V * P
    with np.errstate(all="ignore"):
        Wz = a * _effort(model, Sg, V)
    Wz = np.maximum(Wz, 1e-6)
    hw = fd_step(Wz)
    where2 = lambda i: f"(w={Wz.ravel()[i]:.3g}, v={V.ravel()[i]:.3g})"
    checks = []

    s_zero = _breach(model, np.linspace(0.0, 10.0 / a, m), 0.0)
    checks.append(Check("A1 S(z,0)=0", bool(np.all(s_zero == 0)),
                        "" if np.all(s_zero == 0) else f"max {np.max(np.abs(s_zero)):.3g}"))
    s0 = _breach(model, 0.0, v1)
    err = float(np.max(np.abs(s0 - v1)))
    checks.append(Check("A2 S(0,v)=v", err <= 1e-12, f"max error {err:.3g}"))

    Sw = lambda w: _breach(model, w / a, V)
    S_c, S_p, S_m = Sw(Wz), Sw(Wz + hw), Sw(Wz - hw)
    checks.append(_sign_check("A3 S_z<0", (S_p - S_m) / (2 * hw), -1, where2))
    checks.append(_sign_check("A4 S_zz>0", (S_p - 2 * S_c + S_m) / hw ** 2, +1, where2))

    big = np.array([1e2, 1e4, 1e6, 1e8, 1e10]) / a
    tail = _breach(model, big[None, :], v1[:, None])
    ok5 = bool(np.all(np.diff(tail, axis=1) <= 0) and np.all(tail[:, -1] <= 1e-3 * v1))
    checks.append(Check("A5 S->0 as z->inf", ok5, f"max S at alpha*z=1e10: {np.max(tail[:, -1]):.3g}"))

    hv = fd_step(V) * np.minimum(1.0, 0.5 * (1 - V) / fd_step(V))
    Sv = (_breach(model, Wz / a, V + hv) - _breach(model, Wz / a, V - hv)) / (2 * hv)
    checks.append(_sign_check("A6 S_v>0", Sv, +1, where2))

    # effort-space checks on the same (s, v) grid
    hs = fd_step(Sg) * np.minimum(1.0, 0.5 * Sg / fd_step(Sg))
    Z = lambda s, v: _effort(model, s, v)
    with np.errstate(all="ignore"):
        Zss = (Z(Sg + hs, V) - 2 * Z(Sg, V) + Z(Sg - hs, V)) / hs ** 2
        Zsv = (Z(Sg + hs, V + hv) - Z(Sg + hs, V - hv) - Z(Sg - hs, V + hv) + Z(Sg - hs, V - hv)) / (4 * hs * hv)
    where_s = lambda i: f"(s={Sg.ravel()[i]:.3g}, v={V.ravel()[i]:.3g})"
    checks.append(_sign_check("Z_ss>0", Zss, +1, where_s))
    checks.append(_sign_check("Z_sv<0 (effort complementarity)", Zsv, -1, where_s))

    fv = _f(model, v1)
    gs = _g(model, v1)
    checks.append(_sign_check("f>0", fv, +1, lambda i: f"v={v1[i]:.3g}"))
    checks.append(_sign_check("g>0", gs, +1, lambda i: f"s={v1[i]:.3g}"))
    h1 = fd_step(v1)
    checks.append(_sign_check("f_v>0", (_f(model, v1 + h1) - _f(model, v1 - h1)) / (2 * h1), +1,
                              lambda i: f"v={v1[i]:.3g}"))
    checks.append(_sign_check("g_s>0", (_g(model, v1 + h1) - _g(model, v1 - h1)) / (2 * h1), +1,
                              lambda i: f"s={v1[i]:.3g}"))

    gam = _gamma(model, np.concatenate(([0.0], v1, [1.0])))
    checks.append(Check("log-convexity gamma>=0", bool(np.all(gam >= 0)),
                        f"min gamma {np.min(gam):.4g}"))
    return CheckReport(tuple(checks))


# --- config -----------------------------------------------------------------

def parse_poly(text: str) -> tuple[float, ...]:
    cleaned = text.strip().strip("[]()")
    parts = [p for p in cleaned.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("gamma_poly needs at least one coefficient")
    return tuple(float(p) for p in parts)


def model_from_config(cfg: dict) -> BreachModel:
    """Build a model from ``family``/``alpha``/``beta``/``gamma_poly`` keys."""
    try:
        family = Family(cfg.get("family", "gl1").strip().lower())
    except ValueError as exc:
        raise ValueError(f"unknown family {cfg.get('family')!r} (expected gl1, gl2 or custom)") from exc
    if "alpha" not in cfg:
        raise ValueError("missing key 'alpha'")
    alpha = float(cfg["alpha"])
    if family is Family.GL1:
        return BreachModel.gl1(alpha, float(cfg.get("beta", 1.0)))
    if family is Family.GL2:
        return BreachModel.gl2(alpha)
    if "gamma_poly" not in cfg:
        raise ValueError("custom family needs 'gamma_poly'")
    return BreachModel.polynomial(alpha, parse_poly(cfg["gamma_poly"]))
