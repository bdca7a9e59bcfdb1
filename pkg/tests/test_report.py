import dataclasses
import json
import re

import pytest

from roofkit.cost_models import Conv2DSpec, LSTMSpec
from roofkit.machine import MachineSpec
from roofkit.profiles import KernelAggregate, read_profile
from roofkit.report import ENTRY_KEYS, build_report, report_from_json, serialize_report
from roofkit.roofline import BoundClass, analyze, classify
from roofkit.sweep import SweepSeries, build_measured_series, run_analytical_sweep

CONV = Conv2DSpec(n=16, h=112, w=112, c_in=64, k_h=3, k_w=3, c_out=64, stride=2, elem_bytes=2)
LSTM = LSTMSpec(batch=16, seq_len=16, input_features=32, hidden=16, elem_bytes=2)


@pytest.fixture(scope="module")
def lstm_series(v100, data_dir):
    folder = data_dir / "profiles" / "lstm" / "pytorch"
    return build_measured_series([read_profile(p) for p in sorted(folder.glob("*.csv"))], "batch", v100,
                                 series_label="pytorch")


def test_overhead_bound_entries_name_launch_overhead(v100, lstm_series):
    r = build_report([lstm_series], v100)
    assert len(r.entries) == 4
    for e in r.entries:
        assert e.classification is BoundClass.OVERHEAD
        assert e.binding == "launch overhead"
        assert "launch" in e.recommendation
    md = serialize_report(r, "markdown")
    assert "bound by launch overhead" in md
    assert "(MEASURED)" in md


def test_on_roofline_kernel_has_unit_gap(v100):
    s = run_analytical_sweep(CONV, "batch", [16], v100)
    (e,) = build_report([s], v100).entries
    assert e.gap == 1.0
    assert e.predicted


def test_entry_count_and_order(v100):
    a = run_analytical_sweep(CONV, "batch", [16, 32, 64], v100, series_label="b-conv")
    b = run_analytical_sweep(LSTM, "seq_len", [16, 32], v100, kernels_per_step=2, epilogue=4, series_label="a-lstm")
    r = build_report([a, b], v100)
    assert len(r.entries) == 5
    assert [(e.series, e.param) for e in r.entries] == [
        ("a-lstm", 16), ("a-lstm", 32), ("b-conv", 16), ("b-conv", 32), ("b-conv", 64)]


def test_machine_mismatch(v100):
    s = run_analytical_sweep(CONV, "batch", [16], v100)
    other = dataclasses.replace(v100, name="A100")
    with pytest.raises(ValueError):
        build_report([s], other)


def test_empty_report(v100):
    r = build_report([], v100)
    assert json.loads(serialize_report(r, "json")) == {"machine": v100.name, "entries": []}
    assert "No entries" in serialize_report(r, "markdown")


def test_json_keys_and_round_trip(v100, lstm_series):
    s = run_analytical_sweep(CONV, "c_out", [64, 128], v100)
    r = build_report([lstm_series, s], v100)
    text = serialize_report(r, "json")
    doc = json.loads(text)
    assert list(doc) == ["machine", "entries"]
    for entry in doc["entries"]:
        assert tuple(entry) == ENTRY_KEYS
    back = report_from_json(text)
    assert back == r
    assert serialize_report(back, "json") == text


def test_infinite_values_serialize_as_null(v100):
    k = analyze(KernelAggregate(1e9, 0, 1e-3, 1, 0), v100)
    s = SweepSeries("pure compute", "x", ((1, k),), v100)
    text = serialize_report(build_report([s], v100), "json")
    assert json.loads(text)["entries"][0]["ai"] is None
    assert report_from_json(text).entries[0].ai == float("inf")


def test_markdown_matches_json_to_six_digits(v100, lstm_series):
    r = build_report([lstm_series], v100)
    md = serialize_report(r, "markdown")
    rows = [line for line in md.splitlines() if re.match(r"\| \d", line)]
    assert len(rows) == len(r.entries)
    for row, e in zip(rows, r.entries):
        cells = [c.strip() for c in row.strip("|").split("|")]
        numeric = dict(zip(("param", "ai"), cells[:2]))
        numeric.update(dict(zip(("measured_sec", "bound_sec", "gap", "attained_flops", "overhead_share",
                                 "zero_ai_share"), cells[3:9])))
        for key, cell in numeric.items():
            assert float(cell) == pytest.approx(getattr(e, key), rel=5e-6)
        assert cells[2] == e.classification.value


def test_classification_comes_from_core(v100, lstm_series):
    r = build_report([lstm_series], v100)
    for e, k in zip(r.entries, lstm_series.kernels):
        assert e.classification is classify(k.time, k.overhead_sec)
        assert e.overhead_share == k.overhead_sec / k.measured_time_sec


def test_overhead_share_above_one_is_flagged(v100, lstm_series):
    r = build_report([lstm_series], v100)
    assert all(e.overhead_share > 1 for e in r.entries)
    assert all(any("overhead share" in f for f in e.flags) for e in r.entries)
    assert "Flags:" in serialize_report(r, "markdown")


def test_unknown_format(v100):
    with pytest.raises(ValueError):
        serialize_report(build_report([], v100), "yaml")
