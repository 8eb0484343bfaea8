"""Command-line entry point.

Exit status: 0 success, 2 bad configuration or arguments, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .attacker import AttackerParams, attacker_curve, peak_effort, price_of_deterrence
from .baseline import compare_models
from .config import ConfigError, load_config, optional_number, parse_range, scenario_from_config
from .defender import solve_defender
from .fixed_point import solve_fpe
from .model import DomainError, model_from_config
from .report import csv_text, format_value, run_sweep, spec_from_config, write_outputs

EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record(d: dict) -> str:
    width = max(len(k) for k in d)
    return "".join(f"{k:<{width}}  {format_value(v)}\n" for k, v in d.items())


def cmd_attacker_curve(args) -> int:
    cfg = load_config(args.model)
    try:
        model = model_from_config(cfg)
        params = AttackerParams(args.G, args.c)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = attacker_curve(model, params, args.v, args.samples)
    _emit(csv_text(["s", "z", "y_star", "T_star", "net_gain"], rows), args.out)
    if args.out:
        s_plus, y_plus = peak_effort(params)
        price = price_of_deterrence(model, params, args.v)
        print(f"s_P={format_value(price.s_P)} s_plus={format_value(s_plus)} "
              f"y_plus={format_value(y_plus)} z_P={format_value(price.z_P)}")
    return 0


def _v_grid(text):
    lo, hi, n = parse_range(text)
    return [float(x) for x in np.linspace(lo, hi, n)]


def cmd_defender_policy(args) -> int:
    cfg = load_config(args.scenario)
    scn = scenario_from_config(cfg)
    if args.v_sweep:
        rows = [solve_defender(scn, v).as_row() for v in _v_grid(args.v_sweep)]
        cols = ["v", "DI", "decision", "s_star", "z_star", "phi_star", "s1", "s2"]
        _emit(csv_text(cols, rows), args.out)
        return 0
    v = args.v if args.v is not None else optional_number(cfg, "v")
    if v is None:
        raise ConfigError("give --v, --v-sweep or a 'v' key in the scenario")
    _emit(_record(solve_defender(scn, v).as_row()), args.out)
    return 0


def cmd_fixed_points(args) -> int:
    scn = scenario_from_config(load_config(args.scenario))
    rep = solve_fpe(scn)
    if args.json:
        _emit(json.dumps(rep.to_dict(), indent=2) + "\n", args.out)
        return 0
    head = dict(R=scn.R, s_hat=rep.s_hat, v_hat=rep.v_hat, v_L=rep.v_L, v_H=rep.v_H,
                R_c="unbounded" if rep.R_c == float("inf") else rep.R_c)
    table = [("interval", "sign(s1-v)", "DI")]
    for p in rep.partition:
        sign = "" if p.sign is None else ("+" if p.sign > 0 else "-")
        table.append((f"({format_value(p.lo)}, {format_value(p.hi)}]", sign, p.interval.value))
    w0 = max(len(r[0]) for r in table) + 2
    lines = [_record(head), "\n"] + [f"{a:<{w0}}{b:<12}{c}\n" for a, b, c in table]
    _emit("".join(lines), args.out)
    return 0


def cmd_compare_gl(args) -> int:
    scn = scenario_from_config(load_config(args.scenario))
    rows = compare_models(scn, _v_grid(args.v_sweep))
    _emit(csv_text(["v", "z_gl", "z_two_sided", "decision", "exceeds"], rows), args.out)
    return 0


def cmd_sweep(args) -> int:
    spec = spec_from_config(load_config(args.spec))
    result = run_sweep(spec)
    for path in write_outputs(result, args.out_dir, spec.title):
        print(path)
    failed = sum(1 for r in result.records if r.get("error"))
    if failed:
        print(f"{failed} of {len(result.records)} points failed; see the error column", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="secinvest",
                                description="Attacker/defender security investment solver.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("attacker-curve", help="attacker best response along s in (0, v]")
    a.add_argument("--model", required=True, help="config file with the breach model")
    a.add_argument("--G", type=float, required=True, help="attacker gain")
    a.add_argument("--c", type=float, required=True, help="attacker cost per attempt")
    a.add_argument("--v", type=float, required=True, help="initial vulnerability")
    a.add_argument("--samples", type=int, default=200)
    a.add_argument("--out", help="CSV path (default stdout)")
    a.set_defaults(func=cmd_attacker_curve)

    d = sub.add_parser("defender-policy", help="optimal defender decision")
    d.add_argument("--scenario", required=True)
    g = d.add_mutually_exclusive_group()
    g.add_argument("--v", type=float)
    g.add_argument("--v-sweep", metavar="LO:HI:N")
    d.add_argument("--out")
    d.set_defaults(func=cmd_defender_policy)

    f = sub.add_parser("fixed-points", help="transition vulnerabilities and interval partition")
    f.add_argument("--scenario", required=True)
    f.add_argument("--json", action="store_true")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fixed_points)

    c = sub.add_parser("compare-gl", help="two-sided vs one-sided investment")
    c.add_argument("--scenario", required=True)
    c.add_argument("--v-sweep", metavar="LO:HI:N", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare_gl)

    s = sub.add_parser("sweep", help="run a sweep spec, write CSV and SVG")
    s.add_argument("--spec", required=True)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
