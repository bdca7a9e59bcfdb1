"""roofkit command line.

Exit codes: 0 success, 1 usage error, 2 input/schema error, 3 internal
invariant violation. Diagnostics go to stderr; data goes to the files named by
flags or to stdout.
"""

import argparse
import logging
import sys
from collections import OrderedDict
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .cost_models import Conv2DSpec, ConvWeightTraffic, LSTMSpec, WeightTraffic, invocation_estimate, layer_complexity
from .errors import InvariantError, SchemaError
from .machine import (TensorCorePeakParams, ceilings_summary, derive_tensor_core_peak, machine_balance,
                      read_machine_file)
from .plot import ChartKind, ChartSpec, render_chart
from .profiles import aggregate, read_profile, serialize_profile_json
from .report import build_report, serialize_report
from .roofline import analyze, arithmetic_intensity
from .sweep import (SweepSeries, build_measured_series, common_parameter, load_sweep_configs,
                    predicted_point, run_sweep_config)

log = logging.getLogger("roofkit")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
CHARTS = {"classic": ChartKind.CLASSIC, "complexity": ChartKind.COMPLEXITY, "time": ChartKind.TIME,
          "4d": ChartKind.COMPLEXITY_TIME_4D}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _write(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _collect_profile_paths(items: Sequence[str]) -> List[Path]:
    paths = []
    for item in items:
        p = Path(item)
        if p.is_dir():
            found = sorted(q for q in p.rglob("*") if q.suffix in (".csv", ".json") and q.is_file())
            if not found:
                raise SchemaError(item, "directory holds no .csv or .json profiles")
            paths.extend(found)
        else:
            paths.append(p)
    return paths


def measured_series(items: Sequence[str], machine, compute_label, memory_label,
                    parameter: Optional[str] = None) -> List[SweepSeries]:
    """Group profiles by parent directory name into one series each."""
    groups = OrderedDict()
    for path in _collect_profile_paths(items):
        profile = read_profile(path)
        groups.setdefault(path.parent.name or ".", []).append(profile)
    parameter = parameter or common_parameter([p.label for ps in groups.values() for p in ps])
    series = []
    for name, profiles in sorted(groups.items()):
        if parameter is None:
            if len(profiles) > 1:
                raise SchemaError("--parameter", f"profiles in {name!r} need a shared key=value label "
                                                 "(name files like batch=16.csv) or an explicit --parameter")
            k = analyze(aggregate(profiles[0]), machine, compute_label, memory_label, label=profiles[0].label)
            series.append(SweepSeries(f"{name}/{profiles[0].label}", "", ((0.0, k),), machine, predicted=False))
        else:
            series.append(build_measured_series(profiles, parameter, machine, compute_label, memory_label,
                                                series_label=name))
    return series


def _report_format(path: str, explicit: Optional[str]) -> str:
    if explicit:
        return explicit
    return "markdown" if path.endswith(".md") else "json"


def _log_flags(report):
    for e in report.entries:
        for flag in e.flags:
            log.warning("%s param=%g: %s", e.series, e.param, flag)


def _chart(args, machine, series, compute_labels):
    spec = ChartSpec(CHARTS[args.chart], machine, tuple(series), tuple(compute_labels), args.memory,
                     tuple(args.x_range) if getattr(args, "x_range", None) else None,
                     tuple(args.y_range) if getattr(args, "y_range", None) else None,
                     args.title or "")
    _write(args.svg, render_chart(spec))


def cmd_machine(args):
    if args.action == "derive-tc":
        params = TensorCorePeakParams(args.sms, args.tc_per_sm, args.clock_ghz * 1e9, args.ops_per_cycle, args.fma)
        print(f"{derive_tensor_core_peak(params):.6g}".replace("e+", "e"))
    else:
        spec = read_machine_file(args.machine)
        print(ceilings_summary(spec))
        mem = spec.memory(args.memory)
        for c in spec.compute_ceilings:
            print(f"  machine balance {c.label}/{mem.label}: {machine_balance(c, mem):.2f} FLOPs/Byte")
    return EXIT_OK


def cmd_ingest(args):
    profile = read_profile(args.profile, args.label)
    _write(args.out, serialize_profile_json(profile))
    return EXIT_OK


def cmd_analyze(args):
    machine = read_machine_file(args.machine)
    for w in machine.warnings:
        log.warning("%s: %s", args.machine, w)
    series = measured_series(args.profile, machine, args.ceiling, args.memory, args.parameter)
    report = build_report(series, machine)
    _log_flags(report)
    _write(args.report, serialize_report(report, _report_format(args.report, args.format)))
    if args.svg:
        _chart(args, machine, series, [args.ceiling] if args.ceiling else [])
    return EXIT_OK


def cmd_model(args):
    machine = read_machine_file(args.machine)
    if args.layer == "conv2d":
        spec = Conv2DSpec(args.n, args.h, args.w, args.c_in, args.k_h, args.k_w, args.c_out, args.stride,
                          args.padding, args.elem_bytes, ConvWeightTraffic(args.weight_traffic))
        epilogue = 0
    else:
        spec = LSTMSpec(args.batch, args.seq_len, args.input_features, args.hidden, args.elem_bytes,
                        WeightTraffic(args.weight_traffic), args.activation_flops)
        epilogue = args.epilogue
    point = layer_complexity(spec)
    k = predicted_point(spec, machine, args.ceiling, args.memory, args.kernels_per_step, epilogue)
    print(f"cc_flops {point.cc}")
    print(f"bc_bytes {point.bc}")
    print(f"ai {arithmetic_intensity(point):.6g}")
    print(f"invocations {invocation_estimate(spec, args.kernels_per_step, epilogue)}")
    print(f"bound_runtime_sec {k.bound_runtime_sec:.6g}")
    print(f"class {k.classification.value}")
    print(f"binding {k.binding}")
    return EXIT_OK


def cmd_sweep(args):
    machine = read_machine_file(args.machine)
    with open(args.config, "rb") as fh:
        configs = load_sweep_configs(fh.read())
    series = [run_sweep_config(c, machine, args.ceiling, args.memory) for c in configs]
    labels = [s.series_label for s in series]
    if len(set(labels)) != len(labels):
        raise SchemaError("label", "sweep configs need distinct labels")
    report = build_report(series, machine)
    _log_flags(report)
    _write(args.report, serialize_report(report, _report_format(args.report, args.format)))
    if args.svg:
        _chart(args, machine, series, [args.ceiling] if args.ceiling else [])
    return EXIT_OK


def cmd_plot(args):
    machine = read_machine_file(args.machine)
    if not args.profile and not args.config:
        raise UsageError("plot: give --profile and/or --config")
    primary = args.ceiling[0] if args.ceiling else None
    series = []
    if args.profile:
        series += measured_series(args.profile, machine, primary, args.memory, args.parameter)
    if args.config:
        for path in args.config:
            with open(path, "rb") as fh:
                series += [run_sweep_config(c, machine, primary, args.memory) for c in load_sweep_configs(fh.read())]
    _chart(args, machine, series, args.ceiling or [])
    return EXIT_OK


def _positive_range(parser_name):
    def convert(text):
        value = float(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"{parser_name} bounds must be > 0")
        return value
    return convert


def _add_chart_flags(p, required=False):
    p.add_argument("--svg", required=required, help="write an SVG chart here")
    p.add_argument("--chart", choices=sorted(CHARTS), default="4d")
    p.add_argument("--title", default="")
    p.add_argument("--x-range", nargs=2, type=_positive_range("--x-range"), metavar=("MIN", "MAX"))
    p.add_argument("--y-range", nargs=2, type=_positive_range("--y-range"), metavar=("MIN", "MAX"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="roofkit", description="Time-based roofline analysis.")
    parser.add_argument("--version", action="version", version=f"roofkit {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    m = sub.add_parser("machine", help="machine characterization")
    msub = m.add_subparsers(dest="action", parser_class=_Parser)
    msub.required = True
    tc = msub.add_parser("derive-tc", help="theoretical Tensor Core peak (FLOP/s)")
    tc.add_argument("--sms", type=int, required=True)
    tc.add_argument("--tc-per-sm", type=int, required=True)
    tc.add_argument("--clock-ghz", type=float, required=True)
    tc.add_argument("--ops-per-cycle", type=int, default=64)
    tc.add_argument("--fma", type=int, default=2)
    show = msub.add_parser("show", help="print ceilings and machine balance")
    show.add_argument("--machine", required=True)
    show.add_argument("--memory")
    m.set_defaults(func=cmd_machine)

    ing = sub.add_parser("ingest", help="canonicalize a profiler CSV into JSON")
    ing.add_argument("--profile", required=True)
    ing.add_argument("--out", required=True)
    ing.add_argument("--label")
    ing.set_defaults(func=cmd_ingest)

    an = sub.add_parser("analyze", help="analyze measured profiles")
    an.add_argument("--profile", action="append", required=True,
                    help="CSV/JSON profile or directory of them (repeatable)")
    an.add_argument("--machine", required=True)
    an.add_argument("--ceiling", help="compute ceiling label (default: first)")
    an.add_argument("--memory", help="memory ceiling label (default: first)")
    an.add_argument("--parameter", help="label key to sweep over (default: the only shared key)")
    an.add_argument("--report", required=True)
    an.add_argument("--format", choices=("json", "markdown"))
    _add_chart_flags(an)
    an.set_defaults(func=cmd_analyze)

    mo = sub.add_parser("model", help="analytical complexity of one layer")
    msub = mo.add_subparsers(dest="layer", parser_class=_Parser)
    msub.required = True
    conv = msub.add_parser("conv2d")
    for flag in ("--n", "--h", "--w", "--c-in", "--k-h", "--k-w", "--c-out"):
        conv.add_argument(flag, type=int, required=True)
    conv.add_argument("--stride", type=int, default=1)
    conv.add_argument("--padding", type=int, default=0)
    conv.add_argument("--weight-traffic", choices=[w.value for w in ConvWeightTraffic],
                      default=ConvWeightTraffic.ONCE.value)
    lstm = msub.add_parser("lstm")
    for flag in ("--batch", "--seq-len", "--input-features", "--hidden"):
        lstm.add_argument(flag, type=int, required=True)
    lstm.add_argument("--weight-traffic", choices=[w.value for w in WeightTraffic],
                      default=WeightTraffic.STREAMED_PER_STEP.value)
    lstm.add_argument("--activation-flops", type=int, default=1)
    lstm.add_argument("--epilogue", type=int, default=0)
    for p in (conv, lstm):
        p.add_argument("--elem-bytes", type=int, choices=(2, 4, 8), default=4)
        p.add_argument("--kernels-per-step", type=int, default=1)
        p.add_argument("--machine", required=True)
        p.add_argument("--ceiling")
        p.add_argument("--memory")
    mo.set_defaults(func=cmd_model)

    sw = sub.add_parser("sweep", help="run analytical sweeps from a config file")
    sw.add_argument("--config", required=True)
    sw.add_argument("--machine", required=True)
    sw.add_argument("--ceiling")
    sw.add_argument("--memory")
    sw.add_argument("--report", required=True)
    sw.add_argument("--format", choices=("json", "markdown"))
    _add_chart_flags(sw)
    sw.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="render a chart from profiles and/or sweep configs")
    pl.add_argument("--profile", action="append", default=[])
    pl.add_argument("--config", action="append", default=[])
    pl.add_argument("--machine", required=True)
    pl.add_argument("--ceiling", action="append", help="compute ceiling(s); the first drives classification")
    pl.add_argument("--memory")
    pl.add_argument("--parameter")
    _add_chart_flags(pl, required=True)
    pl.set_defaults(func=cmd_plot)
    return parser


def _configure_logging():
    # bind to the current stderr on every call so in-process callers can capture it
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("roofkit: %(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.WARNING)
    log.propagate = False


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"roofkit: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except SchemaError as exc:
        print(f"roofkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"roofkit: input error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
