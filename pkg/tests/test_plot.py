import math
import re

import numpy as np
import pytest

from rparallel.io import write_csv
from rparallel.measures import MEASURE_COLUMNS
from rparallel.plot import SchemaError, Series, render_svg, series_from_csv
from rparallel.summary import SUMMARY_COLUMNS


def _strokes(svg):
    return re.findall(r'<polyline data-series="([^"]*)" stroke="([^"]*)"(?: fill="none" stroke-width="1.5")?(?: stroke-dasharray="([^"]*)")?', svg)


def test_single_column_single_polyline(tmp_path):
    write_csv(tmp_path / "a.csv", {"r": np.arange(1.0, 6.0), "mu00": np.arange(5.0) ** 2})
    svg = render_svg(series_from_csv(tmp_path / "a.csv"))
    assert svg.count("<polyline") == 1
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_missing_values_break_the_line(tmp_path):
    y = np.array([1.0, 2.0, math.nan, 4.0, 5.0, math.nan, 7.0])
    write_csv(tmp_path / "a.csv", {"r": np.arange(7.0), "nu11": y})
    svg = render_svg(series_from_csv(tmp_path / "a.csv"))
    assert svg.count("<polyline") == 2
    assert svg.count("<circle") == 1
    # no point is placed at y = 0 for the gaps
    pts = [p for line in re.findall(r'points="([^"]*)"', svg) for p in line.split()]
    assert len(pts) == 4


def test_overlay_distinct_strokes(tmp_path):
    for k in range(12):
        write_csv(tmp_path / f"c{k}.csv", {"r": np.arange(3.0), "mu10": np.arange(3.0) * k})
    series = [s for k in range(12) for s in series_from_csv(tmp_path / f"c{k}.csv")]
    styles = {(c, d) for _, c, d in _strokes(render_svg(series))}
    assert len(styles) == 12


def test_summary_schema(tmp_path):
    n = 3
    cols = {"r": np.arange(1.0, 4.0), "value": np.ones(n), "kind": ["L"] * n, "pair": ["01"] * n}
    for c in SUMMARY_COLUMNS[4:]:
        cols[c] = np.ones(n)
    write_csv(tmp_path / "L_01.csv", cols, SUMMARY_COLUMNS)
    (s,) = series_from_csv(tmp_path / "L_01.csv")
    assert s.name == "L_01:L01"
    with pytest.raises(SchemaError):
        series_from_csv(tmp_path / "L_01.csv", ["mu00"])


def test_schema_mismatch(tmp_path):
    write_csv(tmp_path / "x.csv", {"r": [1.0], "weird": [2.0]})
    with pytest.raises(SchemaError, match="neither"):
        series_from_csv(tmp_path / "x.csv")
    write_csv(tmp_path / "y.csv", {"t": [1.0]})
    with pytest.raises(SchemaError, match="'r'"):
        series_from_csv(tmp_path / "y.csv")
    write_csv(tmp_path / "z.csv", {"r": [1.0], "mu00": [1.0]})
    with pytest.raises(SchemaError, match="mu11"):
        series_from_csv(tmp_path / "z.csv", ["mu11"])


def test_full_measure_schema(tmp_path):
    cols = {c: np.arange(4.0) for c in MEASURE_COLUMNS}
    write_csv(tmp_path / "m.csv", cols, MEASURE_COLUMNS)
    assert len(series_from_csv(tmp_path / "m.csv")) == len(MEASURE_COLUMNS) - 1


def test_names_are_escaped():
    svg = render_svg([Series('a"<b>', np.arange(2.0), np.arange(2.0))], title="x & y")
    assert "&lt;b&gt;" in svg and "&quot;" in svg and "x &amp; y" in svg


def test_empty_series_renders():
    svg = render_svg([Series("e", np.array([math.nan]), np.array([math.nan]))])
    assert "<polyline" not in svg and "</svg>" in svg
