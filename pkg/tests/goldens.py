"""Fixture runs whose outputs are stored under tests/golden.

Each run is a CLI argv template; ``{data}`` is the packaged data directory
and ``{out}`` the directory receiving the outputs.
"""

import filecmp
import os

import roofkit
from roofkit.cli import main

DATA = os.path.join(os.path.dirname(roofkit.__file__), "data")
GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

RUNS = {
    "analyze-lstm": (
        ["analyze", "--profile", "{data}/profiles/lstm", "--machine", "{data}/machines/v100.json",
         "--ceiling", "TensorCore", "--report", "{out}/lstm_report.json",
         "--svg", "{out}/lstm_4d.svg", "--chart", "4d", "--title", "LSTM forward, batch sweep"],
        ("lstm_report.json", "lstm_4d.svg"),
    ),
    "analyze-conv2d": (
        ["analyze", "--profile", "{data}/profiles/conv2d", "--machine", "{data}/machines/v100.json",
         "--report", "{out}/conv2d_report.json"],
        ("conv2d_report.json",),
    ),
    "plot-conv2d": (
        ["plot", "--profile", "{data}/profiles/conv2d", "--config", "{data}/sweeps/conv2d_filters.json",
         "--machine", "{data}/machines/v100.json", "--ceiling", "TensorCore", "--ceiling", "FP32",
         "--chart", "complexity", "--svg", "{out}/conv2d_complexity.svg"],
        ("conv2d_complexity.svg",),
    ),
    "plot-lstm-time": (
        ["plot", "--config", "{data}/sweeps/lstm_seq_len.json", "--machine", "{data}/machines/v100.json",
         "--chart", "time", "--svg", "{out}/lstm_seq_len_time.svg"],
        ("lstm_seq_len_time.svg",),
    ),
}


def run(name, out_dir):
    argv, outputs = RUNS[name]
    code = main([a.format(data=DATA, out=out_dir) for a in argv])
    if code != 0:
        raise RuntimeError(f"{name}: exit code {code}")
    return [os.path.join(out_dir, f) for f in outputs]


def matches_golden(path):
    return filecmp.cmp(path, os.path.join(GOLDEN, os.path.basename(path)), shallow=False)
