import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roofkit.cost_models import Conv2DSpec, LSTMSpec
from roofkit.plot import (AXES_RECT, CANVAS_PX, ChartKind, ChartSpec, auto_range, axes_pixel_box, chart_ranges,
                          data_to_svg, decade_range, render_chart, svg_to_data)
from roofkit.profiles import KernelAggregate, read_profile
from roofkit.roofline import analyze, bound_runtime
from roofkit.sweep import SweepSeries, build_measured_series, run_analytical_sweep

import svgutil

CONV = Conv2DSpec(n=16, h=112, w=112, c_in=64, k_h=3, k_w=3, c_out=64, stride=2, elem_bytes=2)
LSTM = LSTMSpec(batch=16, seq_len=16, input_features=32, hidden=16, elem_bytes=2)
KINDS = list(ChartKind)


@pytest.fixture(scope="module")
def conv_series(v100):
    return run_analytical_sweep(CONV, "c_out", [64, 128, 256, 512], v100, series_label="conv")


@pytest.fixture(scope="module")
def lstm_series(v100, data_dir):
    folder = data_dir / "profiles" / "lstm" / "tf1"
    return build_measured_series([read_profile(p) for p in sorted(folder.glob("*.csv"))], "batch", v100,
                                 series_label="tf1")


def _single(machine, cc, bc, t, inv=1, label="k"):
    return SweepSeries(label, "x", ((1, analyze(KernelAggregate(cc, bc, t, inv, 0), machine)),), machine)


def test_decade_range():
    assert decade_range([1e2, 5e3, 1e4]) == (1e1, 1e5)
    assert decade_range([1.0]) == (1e-1, 1e1)
    assert decade_range([3.0, 7.0]) == (1e-1, 1e2)
    assert decade_range([0.0, math.inf]) == (1e-1, 1e1)


def test_auto_range_contains_overhead_box(v100):
    tiny = _single(v100, 10.0, 10.0, 1e-6, inv=100)
    (xlo, xhi), (ylo, yhi) = auto_range([tiny], "complexity")
    t = 100 * 4.2e-6
    assert xlo <= 10.0 and xhi >= v100.memory().bytes_per_sec * t
    assert ylo <= 10.0 and yhi >= v100.compute().flops_per_sec * t
    (xlo, xhi), (ylo, yhi) = auto_range([tiny], "time")
    assert xhi >= t and yhi >= t


def test_auto_range_contains_ridge_points(v100, conv_series):
    (xlo, xhi), (ylo, yhi) = auto_range([conv_series], "classic", ["TensorCore", "FP32"])
    for c in v100.compute_ceilings[::2]:
        assert xlo <= c.flops_per_sec / v100.memory().bytes_per_sec <= xhi
        assert ylo <= c.flops_per_sec <= yhi


def test_chart_spec_validation(v100, conv_series):
    with pytest.raises(ValueError):
        ChartSpec("4d", v100, ())
    with pytest.raises(ValueError):
        ChartSpec("4d", v100, (conv_series,), x_range=(0.0, 1.0))
    with pytest.raises(ValueError):
        ChartSpec("4d", v100, (conv_series,), y_range=(10.0, 1.0))
    with pytest.raises(ValueError):
        ChartSpec("4d", dataclasses.replace(v100, name="other"), (conv_series,))
    with pytest.raises(KeyError):
        ChartSpec("4d", v100, (conv_series,), compute_labels=("FP64",))
    with pytest.raises(ValueError):
        ChartSpec("radar", v100, (conv_series,))


def test_axes_pixel_box():
    x0, ytop, w, h = axes_pixel_box()
    assert (x0, w) == pytest.approx((AXES_RECT[0] * CANVAS_PX[0], AXES_RECT[2] * CANVAS_PX[0]))
    assert ytop + h == pytest.approx(CANVAS_PX[1] * (1 - AXES_RECT[1]))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_pixel_transform_round_trip(lx, ly):
    xr, yr = (1e-3, 1e3), (1e-3, 1e3)
    px, py = data_to_svg(10 ** lx, 10 ** ly, xr, yr)
    x, y = svg_to_data(px, py, xr, yr)
    assert math.log10(x) == pytest.approx(lx, abs=1e-9)
    assert math.log10(y) == pytest.approx(ly, abs=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_render_is_deterministic_and_self_contained(v100, conv_series, lstm_series, kind):
    spec = ChartSpec(kind, v100, (conv_series, lstm_series), title="t")
    a, b = render_chart(spec), render_chart(spec)
    assert a == b
    assert "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\"" in a
    assert 'width="960px" height="720px" viewBox="0 0 960 720"' in a
    assert "<image" not in a and "@font-face" not in a
    root = svgutil.parse(a)
    hrefs = [el.get(svgutil.XLINK) for el in root.iter() if el.get(svgutil.XLINK)]
    assert hrefs and all(h.startswith("#") for h in hrefs)


@pytest.mark.parametrize("kind", KINDS)
def test_marker_count_equals_point_count(v100, conv_series, lstm_series, kind):
    spec = ChartSpec(kind, v100, (conv_series, lstm_series))
    root = svgutil.parse(render_chart(spec))
    for i, s in enumerate(spec.series):
        drawn = svgutil.marker_positions(root, f"series-{i}-closed") + \
            svgutil.marker_positions(root, f"series-{i}-closed-clamped")
        assert len(drawn) == len(s.points)
        opened = svgutil.marker_positions(root, f"series-{i}-open")
        assert len(opened) == (len(s.points) if kind is ChartKind.COMPLEXITY_TIME_4D else 0)


def test_out_of_range_points_are_not_drawn(v100, conv_series):
    spec = ChartSpec("complexity", v100, (conv_series,), x_range=(1e1, 1e8), y_range=(1e5, 1e10))
    root = svgutil.parse(render_chart(spec))
    inside = [k for k in conv_series.kernels if k.complexity.bc <= 1e8 and k.complexity.cc <= 1e10]
    assert len(svgutil.marker_positions(root, "series-0-closed")) == len(inside) < len(conv_series.points)


def test_zero_values_use_clamp_marker(v100):
    copy = _single(v100, 0.0, 1e6, 1e-5)
    root = svgutil.parse(render_chart(ChartSpec("complexity", v100, (copy,))))
    assert svgutil.marker_positions(root, "series-0-closed") == []
    ((px, py),) = svgutil.marker_positions(root, "series-0-closed-clamped")
    xr, yr = chart_ranges(ChartSpec("complexity", v100, (copy,)))
    _, y = svg_to_data(px, py, xr, yr)
    assert y == pytest.approx(yr[0] * 1.01, rel=1e-3)


def _on_curve(root, gid, f, xr, yr, tol=0.5):
    verts = svgutil.path_vertices(root, gid)
    assert len(verts) >= 2
    for px, py in verts:
        x, _ = svg_to_data(px, py, xr, yr)
        _, expected_py = data_to_svg(x, f(x), xr, yr)
        assert abs(py - expected_py) <= tol, (gid, px, py, expected_py)


@pytest.mark.parametrize("kind", ["complexity", "4d"])
def test_balance_diagonal_pixel_positions(v100, conv_series, kind):
    spec = ChartSpec(kind, v100, (conv_series,), compute_labels=("TensorCore", "FP32"))
    root = svgutil.parse(render_chart(spec))
    xr, yr = chart_ranges(spec)
    for c in (v100.compute("TensorCore"), v100.compute("FP32")):
        mb = c.flops_per_sec / v100.memory().bytes_per_sec
        _on_curve(root, f"balance-diagonal-{c.label}", lambda x: mb * x, xr, yr)


def test_overhead_ceiling_pixel_position(v100, lstm_series):
    spec = ChartSpec("classic", v100, (lstm_series,))
    root = svgutil.parse(render_chart(spec))
    xr, yr = chart_ranges(spec)
    level = min(k.complexity.cc / k.overhead_sec for k in lstm_series.kernels)
    _on_curve(root, "overhead-ceiling-0", lambda x: level, xr, yr)
    bw = v100.memory().bytes_per_sec
    _on_curve(root, "memory-ceiling", lambda x: bw * x, xr, yr)


def test_overhead_box_pixel_position(v100, lstm_series):
    spec = ChartSpec("complexity", v100, (lstm_series,))
    root = svgutil.parse(render_chart(spec))
    xr, yr = chart_ranges(spec)
    t = max(k.overhead_sec for k in lstm_series.kernels)
    corner = data_to_svg(v100.memory().bytes_per_sec * t, v100.compute().flops_per_sec * t, xr, yr)
    verts = svgutil.path_vertices(root, "overhead-box-0")
    assert any(abs(px - corner[0]) <= 0.5 and abs(py - corner[1]) <= 0.5 for px, py in verts)


def test_diagonal_kernel_symbols_collinear(v100):
    peak, bw = v100.compute().flops_per_sec, v100.memory().bytes_per_sec
    mb = peak / bw
    s = _single(v100, mb * 1e9, 1e9, 0.05)
    spec = ChartSpec("4d", v100, (s,))
    root = svgutil.parse(render_chart(spec))
    xr, yr = chart_ranges(spec)
    for gid in ("series-0-closed", "series-0-open"):
        ((px, py),) = svgutil.marker_positions(root, gid)
        x, _ = svg_to_data(px, py, xr, yr)
        assert abs(py - data_to_svg(x, mb * x, xr, yr)[1]) <= 0.5


def test_on_roofline_symbols_coincide(v100):
    cc, bc = 1e12, 1e9
    k0 = analyze(KernelAggregate(cc, bc, 1.0, 1, 0), v100)
    t = bound_runtime(k0.complexity, v100.compute(), v100.memory(), k0.overhead_sec)
    s = _single(v100, cc, bc, t)
    assert s.kernels[0].roofline_gap == 1.0
    root = svgutil.parse(render_chart(ChartSpec("4d", v100, (s,))))
    (a,) = svgutil.marker_positions(root, "series-0-closed")
    (b,) = svgutil.marker_positions(root, "series-0-open")
    assert math.dist(a, b) <= 1.0


def test_time_chart_elements(v100, lstm_series):
    root = svgutil.parse(render_chart(ChartSpec("time", v100, (lstm_series,))))
    assert svgutil.by_id(root, "time-diagonal") is not None
    assert svgutil.by_id(root, "overhead-box-0") is not None
    assert any((el.get("id") or "").startswith("isocurve-") for el in root.iter())


@settings(max_examples=6, deadline=None)
@given(st.lists(st.tuples(st.floats(1e3, 1e12), st.floats(1e3, 1e12), st.floats(1e-6, 1e-1)),
                min_size=1, max_size=5))
def test_every_point_drawn_once(v100, raw):
    points = tuple((i, analyze(KernelAggregate(cc, bc, t, 1, 0), v100)) for i, (cc, bc, t) in enumerate(raw))
    s = SweepSeries("rand", "x", points, v100)
    root = svgutil.parse(render_chart(ChartSpec("4d", v100, (s,))))
    assert len(svgutil.marker_positions(root, "series-0-closed")) == len(raw)
    assert len(svgutil.marker_positions(root, "series-0-open")) == len(raw)
