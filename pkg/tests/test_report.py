import csv
import io
import math
import re

import numpy as np
import pytest

from secinvest.attacker import peak_effort
from secinvest.defender import Scenario, objective
from secinvest.model import BreachModel
from secinvest.report import (FigureBundle, SweepResult, SweepSpec, Variable, csv_text, emit_csv, emit_svg,
                              format_value, nice_ticks, run_sweep, svg_text, write_outputs)


def v_spec(scn, n=50, **kw):
    return SweepSpec(scn, Variable.V, 0.001, 0.999, n, **kw)


def polylines(svg):
    out = {}
    for m in re.finditer(r'<polyline data-series="([^"]+)"[^>]*points="([^"]+)"', svg):
        pts = [tuple(map(float, p.split(","))) for p in m.group(2).split()]
        out.setdefault(m.group(1), []).extend(pts)
    return out


def test_spec_validation(class2_example):
    with pytest.raises(ValueError):
        SweepSpec(class2_example, Variable.V, 0.0, 0.5, 10)
    with pytest.raises(ValueError):
        SweepSpec(class2_example, Variable.V, 0.1, 0.5, 1)
    with pytest.raises(ValueError):
        SweepSpec(class2_example, Variable.S, 0.1, 0.5, 10)
    with pytest.raises(ValueError):
        SweepSpec(class2_example, Variable.V, 0.1, 0.5, 10, outputs=frozenset({"bogus"}))
    SweepSpec(class2_example, Variable.R, 10.0, 1e5, 10)


def test_class2_sweep_decisions(class2_example):
    res = run_sweep(v_spec(class2_example, n=400))
    dec = [r["decision"] for r in res.records]
    v = [r["v"] for r in res.records]
    flip = next(i for i in range(1, len(dec)) if dec[i] != dec[i - 1])
    assert set(dec[:flip]) == {"all in"} and set(dec[flip:]) == {"none"}
    assert v[flip] == pytest.approx(0.80, abs=0.01)


def test_minimal_sweep(class2_example):
    res = run_sweep(SweepSpec(class2_example, Variable.V, 0.2, 0.8, 2))
    assert [r["v"] for r in res.records] == [0.2, 0.8]


def test_class1_sweep_intervals(class1_example):
    res = run_sweep(v_spec(class1_example, n=999))
    di = [r["DI"] for r in res.records]
    runs = [di[0]] + [b for a, b in zip(di, di[1:]) if a != b]
    assert runs == ["DI1", "DI3", "DI2", "DI3"]
    marks = res.figures[0].annotations
    assert marks["v_L"] == pytest.approx(0.59, abs=0.01) and marks["v_H"] == pytest.approx(0.92, abs=0.01)


def test_attacker_column_is_post_defense(class1_example):
    res = run_sweep(v_spec(class1_example, n=40, outputs=frozenset({"defender", "attacker"})))
    for r in res.records:
        if r["decision"] == "all in":
            assert r["y_star"] == 0.0


def test_phi_reproduces(class1_example):
    for r in run_sweep(v_spec(class1_example, n=60)).records:
        assert objective(class1_example, r["s_star"], r["v"]) == pytest.approx(r["phi_star"], rel=1e-9)


def test_parallel_matches_serial(class1_example):
    a = run_sweep(v_spec(class1_example, n=40))
    b = run_sweep(v_spec(class1_example, n=40, workers=4))
    assert csv_text(a.columns, a.records) == csv_text(b.columns, b.records)


def test_errors_recorded_in_row():
    bad = Scenario.build(BreachModel.polynomial(1.0, (0.8, -0.5)), 10, 1, 1, 1)
    res = run_sweep(SweepSpec(bad, Variable.V, 0.2, 0.8, 3, outputs=frozenset({"defender"})))
    assert len(res.records) == 3
    assert all(r["error"].startswith("ClassificationError") for r in res.records)


def test_s_sweep(attacker_example):
    res = run_sweep(SweepSpec(attacker_example, Variable.S, 0.02, 0.75, 300, v=0.75))
    assert res.columns == ["s", "z", "y_star", "T_star", "net_gain", "error"]
    fig = res.figures[0]
    svg, omitted = svg_text(fig)
    assert omitted == []
    s_plus, _ = peak_effort(attacker_example.attacker)
    xs = [x for x, _ in fig.series["attacker effort y*"]]
    ys = [y for _, y in fig.series["attacker effort y*"]]
    assert xs[int(np.argmax(ys))] == pytest.approx(s_plus, abs=0.01)
    # the same peak read back from the drawn polyline, in data units
    pts = polylines(svg)["attacker effort y*"]
    px = min(pts, key=lambda p: p[1])[0]
    x_lo, x_hi = 0.02, 0.75
    left, width = 70, 720 - 70 - 170
    assert x_lo + (px - left) / width * (x_hi - x_lo) == pytest.approx(s_plus, abs=0.01)


def test_r_sweep(class1_r5000):
    res = run_sweep(SweepSpec(class1_r5000, Variable.R, 100.0, 5000.0, 5))
    assert res.records[-1]["n_roots"] == 2
    assert res.records[-1]["v_L"] == pytest.approx(0.5867, abs=1e-4)


def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(np.float64(2.5)) == "2.5"
    assert format_value(Variable.R) == "R"


def test_csv_header_only(tmp_path):
    path = emit_csv(SweepResult(["a", "b"], [], []), tmp_path / "x.csv")
    assert path.read_text() == "a,b\n"


def test_csv_round_trip(tmp_path, class1_example):
    res = run_sweep(v_spec(class1_example, n=20))
    path = emit_csv(res, tmp_path / "x.csv")
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    for parsed, rec in zip(rows, res.records):
        for col in ("v", "s_star", "z_star", "phi_star"):
            assert float(parsed[col]) == pytest.approx(rec[col], rel=1e-11, abs=1e-300)
        assert parsed["decision"] == rec["decision"]


def test_csv_io_error(tmp_path):
    with pytest.raises(OSError, match="nope"):
        emit_csv(SweepResult(["a"], [], []), tmp_path / "nope" / "x.csv")


def test_svg_flat_series(tmp_path):
    bundle = FigureBundle("flat", "x", {"zero": [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]})
    emit_svg(bundle, tmp_path / "f.svg")
    text = (tmp_path / "f.svg").read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    (line,) = polylines(text).values()
    assert len({y for _, y in line}) == 1
    assert "href" not in text


def test_svg_marker_out_of_range():
    bundle = FigureBundle("m", "v", {"a": [(0.1, 1.0), (0.5, 2.0)]}, {"v_hat": 0.3, "v_H": 0.92})
    svg, omitted = svg_text(bundle)
    assert omitted == ["v_H"]
    assert bundle.out_of_range == ["v_H"]
    assert svg.count('class="marker"') == 1


def test_svg_needs_series():
    with pytest.raises(ValueError):
        svg_text(FigureBundle("e", "x", {}))


def test_svg_gaps_split_polyline():
    bundle = FigureBundle("g", "x", {"a": [(0.0, 1.0), (0.1, 2.0), (0.2, math.nan), (0.3, 1.0), (0.4, 0.5)]})
    svg, _ = svg_text(bundle)
    assert svg.count("<polyline") == 2


def test_nice_ticks():
    assert nice_ticks(0.0, 1.0) == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert nice_ticks(3.0, 3.0) == [3.0]


def test_determinism(tmp_path, class1_example):
    spec = v_spec(class1_example, n=30)
    a = write_outputs(run_sweep(spec), tmp_path / "a")
    b = write_outputs(run_sweep(spec), tmp_path / "b")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
