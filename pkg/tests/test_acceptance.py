"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``CRITERION n: PASS|FAIL`` line (also when run as
``python tests/test_acceptance.py``).
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from secinvest.attacker import AttackerParams, best_response, peak_effort, price_of_deterrence
from secinvest.baseline import compare_models, solve_gordon_loeb
from secinvest.defender import (Decision, DecisionInterval, Scenario, attacked_objective, class2_threshold,
                                classify_gradient_shape, gradient_function, hessian_surrogate, objective,
                                solve_defender, stationary_points, universal_xi, v_hat, xi_gap, xi_peak,
                                xi_slope)
from secinvest.fixed_point import solve_fpe
from secinvest.model import BreachModel, gamma
from secinvest.numerics import central_diff

MENUS = {
    DecisionInterval.DI1: {Decision.ALL_IN},
    DecisionInterval.DI2: {Decision.ALL_IN, Decision.NONE},
    DecisionInterval.DI3: {Decision.ALL_IN, Decision.SOME},
}


class Criterion:
    """Collects named sub-checks and reports them as one line."""

    def __init__(self, number, title, capsys):
        self.number, self.title, self.capsys = number, title, capsys
        self.items = []

    def check(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))

    def near(self, name, value, target, tol):
        self.check(name, abs(value - target) <= tol, f"{value:.6g} vs {target} +/- {tol}")

    def finish(self):
        ok = all(i[1] for i in self.items)
        failed = [f"{n} ({d})" for n, good, d in self.items if not good]
        summary = "; ".join(f"{n}={d}" for n, _, d in self.items if d)
        line = f"CRITERION {self.number}: {'PASS' if ok else 'FAIL'}  {self.title}"
        if failed:
            line += "  failed: " + "; ".join(failed)
        else:
            line += f"  [{summary}]" if summary else ""
        with self.capsys.disabled():
            print("\n" + line, flush=True)
        assert ok, line


def scenario(model, L, G, c, d):
    return Scenario.build(model, L, G, c, d)


def test_criterion_01_attacker_peak(capsys):
    c = Criterion(1, "attacker peak and price of deterrence", capsys)
    t0 = time.perf_counter()
    params = AttackerParams(10.0, 1.0)
    model = BreachModel.gl1(1.0, 1.0)
    s_plus, y_plus = peak_effort(params)
    z_P = price_of_deterrence(model, params, 0.75).z_P
    elapsed = time.perf_counter() - t0
    c.near("y_plus", y_plus, 3.679, 0.01)
    c.near("s_plus", s_plus, 0.238, 0.01)
    c.near("z_P", z_P, 6.88, 0.01)
    c.check("runtime < 1 s", elapsed < 1.0, f"{elapsed:.3g} s")
    c.finish()


def test_criterion_02_universal_constants(capsys):
    c = Criterion(2, "peak of the universal function", capsys)
    s_xi, xi_hat = xi_peak()
    grid = np.linspace(1e-6, 1 - 1e-6, 1_000_001)
    i = int(np.argmax(universal_xi(grid)))
    c.near("argmax", s_xi, 0.80, 0.01)
    c.near("max", xi_hat, 0.64, 0.01)
    c.check("agrees with dense grid", abs(grid[i] - s_xi) < 1e-5, f"grid argmax {grid[i]:.6f}")
    c.finish()


def test_criterion_03_class2_threshold(capsys):
    c = Criterion(3, "GL class II fixed-point threshold", capsys)
    c.near("threshold", class2_threshold(), 2.87, 0.05)
    for aR, want in ((2.5, 0), (3.5, 1)):
        n = len(solve_fpe(scenario(BreachModel.gl2(1e-4), aR / 1e-4, 1, 1, 1)).roots)
        c.check(f"roots at alpha R = {aR}", n == want, f"{n} roots")
    c.finish()


def test_criterion_04_class1_fixed_points(capsys):
    c = Criterion(4, "fixed points of the GL class I example (R = 5000, alpha = 1e-4, beta = 1.1)", capsys)
    scn = scenario(BreachModel.gl1(1e-4, 1.1), 5000, 1, 1, 1)
    rep = solve_fpe(scn)
    c.near("s_hat", rep.s_hat, 0.47, 0.01)
    c.near("v_L", rep.v_L if rep.v_L is not None else math.nan, 0.59, 0.01)
    c.near("v_H", rep.v_H if rep.v_H is not None else math.nan, 0.92, 0.01)
    c.near("xi(s_hat)", float(universal_xi(rep.s_hat)), 0.43, 0.01)
    level = scn.R * scn.model.alpha * scn.model.beta
    c.check("R alpha beta = 0.55", math.isclose(level, 0.55, rel_tol=1e-12), f"{level!r}")
    c.finish()


def test_criterion_05_class2_transition(capsys):
    c = Criterion(5, "GL class II policy transition", capsys)
    scn = scenario(BreachModel.gl2(1e-4), 1e5, 1e5, 1e4, 1)
    t0 = time.perf_counter()
    vs = np.linspace(0.001, 0.999, 1000)
    dec = [solve_defender(scn, float(v)).decision for v in vs]
    elapsed = time.perf_counter() - t0
    flips = [i for i in range(1, len(dec)) if dec[i] != dec[i - 1]]
    c.check("single flip", len(flips) == 1, f"{len(flips)} flips")
    if flips:
        i = flips[0]
        c.check("all in -> none", dec[i - 1] is Decision.ALL_IN and dec[i] is Decision.NONE,
                f"{dec[i - 1].value} -> {dec[i].value}")
        c.near("flip v", 0.5 * (vs[i - 1] + vs[i]), 0.80, 0.01)
    c.check("runtime < 10 s", elapsed < 10.0, f"{elapsed:.3g} s")
    c.finish()


def test_criterion_06_class1_interval_sequence(capsys):
    c = Criterion(6, "GL class I decision-interval sequence", capsys)
    scn = scenario(BreachModel.gl1(1e-4, 1.1), 1e5, 7e4, 3500, 1)
    vs = np.linspace(0.001, 0.999, 2000)
    step = vs[1] - vs[0]
    sols = [solve_defender(scn, float(v)) for v in vs]
    di = [s.decision_interval for s in sols]
    runs, edges = [di[0]], []
    for i in range(1, len(di)):
        if di[i] != di[i - 1]:
            runs.append(di[i])
            edges.append(0.5 * (vs[i - 1] + vs[i]))
    want = [DecisionInterval.DI1, DecisionInterval.DI3, DecisionInterval.DI2, DecisionInterval.DI3]
    c.check("sequence", runs == want, " -> ".join(r.value for r in runs))
    c.check("decisions within menus", all(s.decision in MENUS[s.decision_interval] for s in sols))
    if len(edges) == 3:
        vh = v_hat(scn)
        c.check("first boundary at v_hat", abs(edges[0] - vh) <= step, f"{edges[0]:.4f} vs {vh:.4f}")
        c.near("v_L", edges[1], 0.59, 0.01)
        c.near("v_H", edges[2], 0.92, 0.01)
    c.finish()


def test_criterion_07_oracle_equivalence(capsys):
    c = Criterion(7, "solver versus brute-force oracles", capsys)
    rng = np.random.default_rng(20240607)
    t0 = time.perf_counter()
    worst, L = -math.inf, 1e5
    for k in range(50):
        R = 10 ** rng.uniform(1, 5)
        alpha = 10 ** rng.uniform(-5, 0)
        model = BreachModel.gl1(alpha, rng.uniform(0.8, 3.0)) if k % 2 == 0 else BreachModel.gl2(alpha)
        scn = scenario(model, L, L / R, 1.0, 1.0)
        v = float(rng.uniform(0.02, 0.99))
        sol = solve_defender(scn, v)
        s = np.linspace(v / 1e5, v, 100_000)
        excess = sol.phi_star - float(np.min(objective(scn, s, v)))
        worst = max(worst, excess)
    c.check("phi* <= grid min + 1e-6 L", worst <= 1e-6 * L, f"worst excess {worst:.3g}")
    worst_y = 0.0
    for _ in range(100):
        params = AttackerParams(float(rng.uniform(1.5, 100.0)), 1.0)
        s = float(rng.uniform(0.01, 0.99))
        y = np.arange(0.0, params.ratio + 1e-4, 1e-4)
        payoff = params.gain * (1 - (1 - s) ** y) - params.unit_cost * y
        worst_y = max(worst_y, abs(best_response(params, s).y_star - y[np.argmax(payoff)]))
    c.check("y* vs grid argmax within 1e-3", worst_y <= 1e-3, f"worst {worst_y:.3g}")
    elapsed = time.perf_counter() - t0
    c.check("runtime < 60 s", elapsed < 60.0, f"{elapsed:.3g} s")
    c.finish()


def test_criterion_08_structural_properties(capsys):
    c = Criterion(8, "structural property suites", capsys)
    gamma1 = [BreachModel.gl1(1e-4, 1.1), BreachModel.gl1(1.0, 1.0), BreachModel.gl2(1e-4)]
    s = np.linspace(1e-3, 1 - 1e-3, 1000)
    ok = all(np.all(central_diff(lambda t: hessian_surrogate(m, t), s) < 0) for m in gamma1)
    c.check("H_s < 0 for Gamma1", ok)

    # Gamma2: gamma(0) > 1, here GL class I with beta < 1
    worst = 0.0
    mono = True
    for beta in (0.8, 0.9):
        m = BreachModel.gl1(1e-4, beta)
        mono &= bool(np.all(np.diff(gradient_function(m, s)) < 0))
        tiny = np.array([1e-9, 1e-8])
        slope = float(np.diff(np.log(gradient_function(m, tiny)))[0] / np.diff(np.log(tiny))[0])
        worst = max(worst, abs(slope - (1 - gamma(m, 0.0))))
    c.check("Gamma2: D decreasing", mono)
    c.check("Gamma2: log-log slope = 1 - gamma(0)", worst <= 0.05, f"max dev {worst:.3g}")

    pattern = True
    cases = [(scenario(BreachModel.gl1(1e-4, 1.1), 1e5, 7e4, 3500, 1), (0.6, 0.75, 0.9, 0.95)),
             (scenario(BreachModel.gl2(1e-4), 1e5, 1e5, 1e4, 1), (0.6, 0.8, 0.95))]
    for scn, vs in cases:
        for v in vs:
            s2, s1 = stationary_points(scn, v)
            dphi = lambda t: central_diff(lambda u: attacked_objective(scn, u, v), t)
            for lo, hi, sign in ((scn.s_P, s2, 1), (s2, s1, -1), (s1, v, 1)):
                lo = max(lo, scn.s_P)
                if hi is None or lo is None or hi - lo < 1e-6:
                    continue
                pts = np.linspace(lo, hi, 34)[1:-1]
                pattern &= bool(np.all(np.sign(dphi(pts)) == sign))
    c.check("stationary-point sign pattern", pattern)

    grid = np.linspace(0, 1, 1025)[1:-1]
    c.check("s^2 - (1-s)log^2(1-s) > 0", bool(np.all(xi_gap(grid) > 0)) and xi_gap(0.0) == 0.0)

    m = BreachModel.gl1(1e-4, 1.1)
    s_hat = classify_gradient_shape(m).s_hat
    lhs = float(xi_slope(s_hat))
    rhs = float(universal_xi(s_hat)) / (m.beta * s_hat)
    c.check("xi'(s_hat) = xi(s_hat)/(beta s_hat) to 1e-6", abs(lhs - rhs) <= 1e-6, f"residual {abs(lhs - rhs):.2g}")
    c.finish()


def test_criterion_09_gordon_loeb(capsys):
    c = Criterion(9, "one-sided baseline", capsys)
    rng = np.random.default_rng(7)
    worst = -math.inf
    for k in range(100):
        alpha = 10 ** rng.uniform(-5, 0)
        kind = k % 3
        if kind == 0:
            model = BreachModel.gl1(alpha, rng.uniform(0.5, 5.0))
        elif kind == 1:
            model = BreachModel.gl2(alpha)
        else:
            model = BreachModel.polynomial(alpha, (0.875, 0.75, -0.5))
        L, d = 10 ** rng.uniform(0, 6), 10 ** rng.uniform(-1, 1)
        v = float(rng.uniform(0.01, 0.99))
        z = solve_gordon_loeb(scenario(model, L, 1, 1, d), v).z_gl
        worst = max(worst, (d * z - v * L / math.e) / L)
    c.check("d z_gl <= v L/e + 1e-9 L", worst <= 1e-9, f"max slack {worst:.3g}")
    rows = compare_models(scenario(BreachModel.gl1(1e-4, 1.1), 1e5, 7e4, 3500, 1),
                          list(np.linspace(0.01, 0.99, 100)))
    n = sum(r["exceeds"] for r in rows)
    c.check("two-sided exceeds one-sided somewhere", n >= 1, f"{n} of 100 points")
    c.finish()


def test_criterion_10_determinism(tmp_path, capsys):
    c = Criterion(10, "byte-identical sweep output", capsys)
    from pathlib import Path
    configs = Path(__file__).resolve().parents[1] / "configs"
    for name in ("attacker_curve.cfg", "gl1_policy.cfg"):
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{name}-{run}"
            proc = subprocess.run([sys.executable, "-m", "secinvest", "sweep", "--spec", str(configs / name),
                                   "--out-dir", str(out)], capture_output=True, text=True)
            c.check(f"{name} run {run} exit 0", proc.returncode == 0, proc.stderr.strip()[:200])
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())} if out.exists() else {})
        c.check(f"{name} identical", outs[0] == outs[1] and bool(outs[0]), ", ".join(outs[0]))
    c.finish()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
