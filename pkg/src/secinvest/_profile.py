"""Reconstruction of g(s) and its reciprocal integral from a log-convexity profile.

Given gamma(s), the relation s g'(s)/g(s) = 1 + gamma(s) fixes g up to a
constant.  We anchor g(1) = 1 and work in u = log s, where

    log g(e^u) = -int_u^0 (1 + gamma(e^t)) dt
    W(e^u)     =  int_u^0 exp(t - log g(e^t)) dt     (= int_s^1 dt / g(t))

Both are tabulated once with composite Simpson on a uniform u-grid; values
between nodes are integrated locally from the nearest node above.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

# 4-panel Simpson on [0, 1]: nodes and weights (sum to 1)
_FRAC = np.linspace(0.0, 1.0, 5)
_WTS = np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 12.0


class ProfileIntegrator:
    def __init__(self, gamma: Callable, panels: int = 8192, s_min: float = 1e-15):
        if panels < 512:
            raise ValueError("need at least 512 panels")
        self.gamma = gamma
        self.u_min = math.log(s_min)
        self.nodes = np.linspace(self.u_min, 0.0, panels + 1)
        self.du = -self.u_min / panels
        self.lam, self.W = self._tabulate(self.nodes, 0.0, 0.0)

    def _rate(self, a, b):
        """int_a^b (1 + gamma(e^t)) dt, broadcast over a and b."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        t = a[..., None] + (b - a)[..., None] * _FRAC
        vals = 1.0 + np.asarray(self.gamma(np.exp(t)), dtype=float)
        return (b - a) * (vals @ _WTS)

    def _w_segment(self, a, b, lam_b):
        """int_a^b exp(t - lam(t)) dt with lam anchored at b."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        t = a[..., None] + (b - a)[..., None] * _FRAC
        lam_t = np.asarray(lam_b)[..., None] - self._rate(t, b[..., None])
        return (b - a) * (np.exp(t - lam_t) @ _WTS)

    def _tabulate(self, nodes, lam_end, w_end):
        a, b = nodes[:-1], nodes[1:]
        seg = self._rate(a, b)
        lam = np.empty_like(nodes)
        lam[-1] = lam_end
        lam[:-1] = lam_end - np.cumsum(seg[::-1])[::-1]
        segw = self._w_segment(a, b, lam[1:])
        W = np.empty_like(nodes)
        W[-1] = w_end
        W[:-1] = w_end + np.cumsum(segw[::-1])[::-1]
        return lam, W

    def _tail(self):
        """Constants of the closed-form extension below the table.

        gamma is frozen at its value at the table edge, so log g_hat is linear
        in u there and W integrates exactly.
        """
        gm = float(np.asarray(self.gamma(np.exp(self.u_min)), dtype=float))
        logc = -self.lam[0] + (1.0 + gm) * self.u_min
        return gm, logc

    def _far(self, u):
        gm, logc = self._tail()
        lam = self.lam[0] + (1.0 + gm) * (u - self.u_min)
        with np.errstate(over="ignore"):
            if gm == 0.0:
                W = self.W[0] + np.exp(logc) * (self.u_min - u)
            else:
                W = self.W[0] + (np.exp(logc - gm * u) - np.exp(logc - gm * self.u_min)) / gm
        return lam, W

    def evaluate(self, s):
        """Return ``(log g_hat(s), W(s))`` for s in (0, 1]."""
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            u = np.log(s)
        k = np.clip(np.ceil((u - self.u_min) / self.du), 0, len(self.nodes) - 1).astype(int)
        ub = self.nodes[k]
        far = u < self.u_min
        uu = np.where(far, ub, u)
        lam = self.lam[k] - self._rate(uu, ub)
        W = self.W[k] + self._w_segment(uu, ub, self.lam[k])
        if np.any(far):
            lam_f, W_f = self._far(u)
            lam = np.where(far, lam_f, lam)
            W = np.where(far, W_f, W)
        return lam, W

    def log_g(self, s):
        return self.evaluate(s)[0]

    def cum_inverse(self, s):
        return self.evaluate(s)[1]

    def invert_cum(self, target):
        """Solve W(s) = target for s (W is decreasing); 0 where target exceeds W(0+)."""
        target = np.asarray(target, dtype=float)
        near = target <= self.W[0]
        lo = np.full(target.shape, self.u_min)
        hi = np.zeros(target.shape)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            above = self.cum_inverse(np.exp(mid)) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        out = np.exp(0.5 * (lo + hi))
        if np.any(~near):
            gm, logc = self._tail()
            excess = target - self.W[0]
            with np.errstate(all="ignore"):
                if gm == 0.0:
                    u = self.u_min - excess * np.exp(-logc)
                else:
                    arg = np.exp(-gm * self.u_min) + gm * excess * np.exp(-logc)
                    u = np.where(arg > 0, -np.log(np.where(arg > 0, arg, 1.0)) / gm, -np.inf)
                far = np.exp(u)
            out = np.where(near, out, far)
        return out
