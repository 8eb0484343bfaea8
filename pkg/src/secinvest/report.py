"""Sweeps over v, R or s, and their CSV / SVG output."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from html import escape
from pathlib import Path
from typing import Optional

import numpy as np

from .attacker import _t_star, _y_star, deterrence_threshold, peak_effort
from .baseline import solve_gordon_loeb
from .config import ConfigError, optional_number, scenario_from_config
from .defender import Scenario, solve_defender
from .fixed_point import solve_fpe
from .model import _effort

OUTPUTS = ("attacker", "defender", "fixed_points", "baseline")


class Variable(str, enum.Enum):
    V = "v"
    R = "R"
    S = "s"


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario
    variable: Variable
    lo: float
    hi: float
    n: int
    outputs: frozenset = frozenset(OUTPUTS)
    v: Optional[float] = None          # fixed initial vulnerability for s and R sweeps
    workers: int = 1
    title: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a sweep needs n >= 2")
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if self.variable is not Variable.R and not (0.0 < self.lo < self.hi < 1.0):
            raise ValueError(f"{self.variable.value} range must satisfy 0 < lo < hi < 1")
        if self.variable is Variable.R and self.lo <= 0.0:
            raise ValueError("R range must be positive")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown or not self.outputs:
            raise ValueError(f"outputs must be a nonempty subset of {', '.join(OUTPUTS)}")
        if self.variable is Variable.S and self.v is None:
            raise ValueError("an s sweep needs a fixed v")
        if self.v is not None and not 0.0 < self.v < 1.0:
            raise ValueError("v must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass
class FigureBundle:
    name: str
    x_label: str
    series: dict[str, list[tuple[float, float]]]
    annotations: dict[str, float] = field(default_factory=dict)

    def in_range(self, x: float) -> bool:
        xs = [p[0] for pts in self.series.values() for p in pts]
        return bool(xs) and min(xs) <= x <= max(xs)

    @property
    def out_of_range(self) -> list[str]:
        return [k for k, x in self.annotations.items() if not self.in_range(x)]


@dataclass
class SweepResult:
    columns: list[str]
    records: list[dict]
    figures: list[FigureBundle]


# --- per-point evaluation ---------------------------------------------------------

def _defender_cols(spec: SweepSpec) -> list[str]:
    cols = []
    if "defender" in spec.outputs:
        cols += ["DI", "decision", "s_star", "z_star", "phi_star", "s1", "s2"]
    if "attacker" in spec.outputs:
        cols += ["y_star", "T_star"]
    if "baseline" in spec.outputs:
        cols += ["z_gl", "gl_bound_ratio"]
    return cols


def _columns(spec: SweepSpec) -> list[str]:
    if spec.variable is Variable.S:
        return ["s", "z", "y_star", "T_star", "net_gain", "error"]
    if spec.variable is Variable.V:
        return ["v"] + _defender_cols(spec) + ["error"]
    cols = ["R"]
    if "fixed_points" in spec.outputs:
        cols += ["s_hat", "v_hat", "v_L", "v_H", "n_roots"]
    if spec.v is not None:
        cols += _defender_cols(spec)
    return cols + ["error"]


def _at_v(scn: Scenario, spec: SweepSpec, v: float) -> dict:
    row = {}
    sol = solve_defender(scn, v)
    if "defender" in spec.outputs:
        row.update(DI=sol.decision_interval.value, decision=sol.decision.value,
                   s_star=sol.s_star, z_star=sol.z_star, phi_star=sol.phi_star,
                   s1=sol.s1, s2=sol.s2)
    if "attacker" in spec.outputs:
        # the attacker responds to the vulnerability the defender actually implements
        a = scn.attacker
        row["y_star"] = float(_y_star(a.ratio, scn.s_P, sol.s_star))
        row["T_star"] = float(_t_star(a.ratio, scn.s_P, sol.s_star))
    if "baseline" in spec.outputs:
        gl = solve_gordon_loeb(scn, v)
        row.update(z_gl=gl.z_gl, gl_bound_ratio=gl.bound_ratio)
    return row


def _point(spec: SweepSpec, x: float) -> dict:
    scn = spec.scenario
    if spec.variable is Variable.S:
        a = scn.attacker
        y = float(_y_star(a.ratio, scn.s_P, x))
        T = float(_t_star(a.ratio, scn.s_P, x))
        z = 0.0 if x >= spec.v else float(_effort(scn.model, x, spec.v))
        return dict(s=x, z=z, y_star=y, T_star=T, net_gain=a.gain * T - a.unit_cost * y)
    if spec.variable is Variable.V:
        return dict(v=x, **_at_v(scn, spec, x))
    scn = scn.with_ratio(x)
    row = dict(R=x)
    if "fixed_points" in spec.outputs:
        rep = solve_fpe(scn)
        row.update(s_hat=rep.s_hat, v_hat=rep.v_hat, v_L=rep.v_L, v_H=rep.v_H,
                   n_roots=len(rep.roots))
    if spec.v is not None:
        row.update(_at_v(scn, spec, spec.v))
    return row


def _safe_point(spec: SweepSpec, x: float) -> dict:
    try:
        row = _point(spec, x)
        row["error"] = ""
    except (ValueError, ArithmeticError) as exc:
        row = {spec.variable.value: x, "error": f"{type(exc).__name__}: {exc}"}
    return row


# --- figures ------------------------------------------------------------------------

def _series(records, x_key, y_key):
    return [(r[x_key], r[y_key]) for r in records if isinstance(r.get(y_key), (int, float))]


def _figures(spec: SweepSpec, records: list[dict]) -> list[FigureBundle]:
    scn = spec.scenario
    figs = []
    if spec.variable is Variable.S:
        s_plus, _ = peak_effort(scn.attacker)
        figs.append(FigureBundle("attacker", "s", {
            "attacker effort y*": _series(records, "s", "y_star"),
            "defender effort z": _series(records, "s", "z"),
        }, dict(s_P=deterrence_threshold(scn.attacker), s_plus=s_plus)))
        return figs
    if spec.variable is Variable.V:
        marks = {}
        rep = None
        if "fixed_points" in spec.outputs:
            try:
                rep = solve_fpe(scn)
            except ValueError:
                pass
        if rep is not None:
            marks["v_hat"] = rep.v_hat
            if rep.v_L is not None:
                marks["v_L"] = rep.v_L
            if rep.v_H is not None:
                marks["v_H"] = rep.v_H
        series = {}
        if "defender" in spec.outputs:
            series["defender z*"] = _series(records, "v", "z_star")
        if "attacker" in spec.outputs:
            series["attacker y*"] = _series(records, "v", "y_star")
        if "baseline" in spec.outputs:
            series["one-sided z"] = _series(records, "v", "z_gl")
        if series:
            figs.append(FigureBundle("investments", "v", series, marks))
        if "defender" in spec.outputs:
            figs.append(FigureBundle("vulnerability", "v", {
                "s*(v)": _series(records, "v", "s_star"),
                "s1(v)": _series(records, "v", "s1"),
                "v": [(r["v"], r["v"]) for r in records],
            }, dict(marks, s_P=scn.s_P)))
        return figs
    if "fixed_points" in spec.outputs:
        figs.append(FigureBundle("fixed_points", "R", {
            "v_hat": _series(records, "R", "v_hat"),
            "v_L": _series(records, "R", "v_L"),
            "v_H": _series(records, "R", "v_H"),
        }))
    return figs


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every grid point; rows come back in grid order whatever ``workers`` is."""
    xs = [float(x) for x in spec.grid()]
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(lambda x: _safe_point(spec, x), xs))
    else:
        records = [_safe_point(spec, x) for x in xs]
    return SweepResult(_columns(spec), records, _figures(spec, records))


def spec_from_config(cfg: dict) -> SweepSpec:
    scn = scenario_from_config(cfg)
    try:
        variable = Variable(cfg.get("variable", "v").strip())
    except ValueError:
        raise ConfigError(f"variable must be v, R or s, got {cfg.get('variable')!r}") from None
    outputs = frozenset(p.strip() for p in cfg.get("outputs", ",".join(OUTPUTS)).split(",") if p.strip())
    try:
        return SweepSpec(scn, variable, optional_number(cfg, "lo"), optional_number(cfg, "hi"),
                         int(cfg.get("n", "100")), outputs, optional_number(cfg, "v"),
                         int(cfg.get("workers", "1")), cfg.get("title", ""))
    except (TypeError, ValueError) as exc:
        if "lo" not in cfg or "hi" not in cfg:
            raise ConfigError("sweep needs 'lo' and 'hi'") from None
        raise ConfigError(str(exc)) from exc


# --- CSV ------------------------------------------------------------------------------

def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, enum.Enum):
        return str(x.value)
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def csv_text(columns: list[str], records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([format_value(r.get(c)) for c in columns])
    return buf.getvalue()


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return path


def emit_csv(result: SweepResult, path) -> Path:
    return _write(path, csv_text(result.columns, result.records))


# --- SVG ------------------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=70, right=170, top=40, bottom=50)


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t = first + len(ticks) * step
    return ticks


def _segments(points):
    """Split at non-finite values so gaps show as breaks in the line."""
    seg = []
    for x, y in points:
        if math.isfinite(x) and math.isfinite(y):
            seg.append((x, y))
        elif seg:
            yield seg
            seg = []
    if seg:
        yield seg


def svg_text(bundle: FigureBundle, title: str = "") -> tuple[str, list[str]]:
    """Render ``bundle``; returns the document and the names of omitted markers."""
    if not bundle.series:
        raise ValueError("a chart needs at least one series")
    pts = [(x, y) for s in bundle.series.values() for x, y in s if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 0.0)]
    x_lo, x_hi = min(p[0] for p in pts), max(p[0] for p in pts)
    y_lo, y_hi = min(p[1] for p in pts), max(p[1] for p in pts)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        pad = max(abs(y_lo), 1.0) * 0.5
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    sx = lambda x: left + (x - x_lo) / (x_hi - x_lo) * pw
    sy = lambda y: top + (y_hi - y) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>')
    for t in nice_ticks(x_lo, x_hi):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{t:.6g}</text>')
    for t in nice_ticks(y_lo, y_hi):
        Y = sy(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="#333"/>')
        out.append(f'<line x1="{left}" y1="{Y:.2f}" x2="{left + pw}" y2="{Y:.2f}" stroke="#eee"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:.6g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(bundle.x_label)}</text>')

    omitted = []
    for name, x in bundle.annotations.items():
        if not (math.isfinite(x) and x_lo <= x <= x_hi):
            omitted.append(name)
            continue
        X = sx(x)
        out.append(f'<line class="marker" x1="{X:.2f}" y1="{top}" x2="{X:.2f}" y2="{top + ph}" '
                   f'stroke="#777" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{X + 3:.2f}" y="{top + 12}" fill="#555">{escape(name)}</text>')

    for i, (name, points) in enumerate(bundle.series.items()):
        color = PALETTE[i % len(PALETTE)]
        for seg in _segments(points):
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in seg)
            out.append(f'<polyline data-series="{escape(name)}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5" points="{coords}"/>')
        ly = top + 10 + 18 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n", omitted


def emit_svg(bundle: FigureBundle, path, title: str = "") -> list[str]:
    """Write the chart; returns names of markers left out because they fall off the x-range."""
    text, omitted = svg_text(bundle, title)
    _write(path, text)
    return omitted


def write_outputs(result: SweepResult, out_dir, title: str = "") -> list[Path]:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out_dir}: {exc.strerror}") from exc
    paths = [emit_csv(result, out_dir / "sweep.csv")]
    for fig in result.figures:
        path = out_dir / f"{fig.name}.svg"
        emit_svg(fig, path, f"{title} - {fig.name}" if title else fig.name)
        paths.append(path)
    return paths
