"""JSON and Markdown analysis reports.

JSON keeps full float precision (non-finite values become ``null``);
Markdown tables round to 6 significant digits.
"""

import json
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .errors import SchemaError
from .machine import MachineSpec
from .roofline import AnalyzedKernel, BoundClass
from .sweep import SweepSeries

ENTRY_KEYS = ("series", "param", "ai", "class", "measured_sec", "bound_sec", "gap", "attained_flops",
              "overhead_share", "zero_ai_share", "binding", "predicted")

RECOMMENDATIONS = {
    "launch overhead": "run time is set by launch latency x kernel count; fuse kernels or batch more work per launch",
    "compute": "raise FLOP throughput: use a faster pipeline (e.g. Tensor Cores) or a lower-complexity algorithm",
    "memory": "reduce data movement: improve reuse, fuse memory-bound kernels, drop zero-AI copies",
}


@dataclass(frozen=True)
class ReportEntry:
    series: str
    param: float
    ai: float
    classification: BoundClass
    measured_sec: float
    bound_sec: float
    gap: float
    attained_flops: float
    overhead_share: float
    zero_ai_share: float
    binding: str
    predicted: bool
    flags: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def recommendation(self) -> str:
        if self.binding == "launch overhead":
            return RECOMMENDATIONS["launch overhead"]
        if self.binding.startswith("compute"):
            return RECOMMENDATIONS["compute"]
        return RECOMMENDATIONS["memory"]

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "param": _num(self.param),
            "ai": _num(self.ai),
            "class": self.classification.value,
            "measured_sec": _num(self.measured_sec),
            "bound_sec": _num(self.bound_sec),
            "gap": _num(self.gap),
            "attained_flops": _num(self.attained_flops),
            "overhead_share": _num(self.overhead_share),
            "zero_ai_share": _num(self.zero_ai_share),
            "binding": self.binding,
            "predicted": self.predicted,
        }


@dataclass(frozen=True)
class AnalysisReport:
    machine: str
    entries: Tuple[ReportEntry, ...] = ()

    def to_dict(self) -> dict:
        return {"machine": self.machine, "entries": [e.to_dict() for e in self.entries]}


def _num(x: float):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def entry_from_kernel(series: SweepSeries, param: float, k: AnalyzedKernel) -> ReportEntry:
    flags = list(k.anomalies)
    if k.overhead_share > 1:
        flags.append(f"overhead share {k.overhead_share:.3g} > 1")
    return ReportEntry(
        series=series.series_label,
        param=param,
        ai=k.ai,
        classification=k.classification,
        measured_sec=k.measured_time_sec,
        bound_sec=k.bound_runtime_sec,
        gap=k.roofline_gap,
        attained_flops=k.attained_flops_per_sec,
        overhead_share=k.overhead_share,
        zero_ai_share=k.zero_ai_share,
        binding=k.binding,
        predicted=series.predicted,
        flags=tuple(flags),
    )


def build_report(series: Sequence[SweepSeries], machine: MachineSpec) -> AnalysisReport:
    entries: List[ReportEntry] = []
    for s in series:
        if s.machine != machine:
            raise ValueError(f"series {s.series_label!r} was analyzed on {s.machine.name!r}, not {machine.name!r}")
        entries.extend(entry_from_kernel(s, v, k) for v, k in s.points)
    entries.sort(key=lambda e: (e.series, e.param))
    return AnalysisReport(machine.name, tuple(entries))


def _g6(x) -> str:
    if x is None:
        return "inf"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, (int, float)):
        return f"{x:.6g}"
    return str(x)


def report_to_json(r: AnalysisReport) -> str:
    return json.dumps(r.to_dict(), indent=2, allow_nan=False) + "\n"


def report_to_markdown(r: AnalysisReport) -> str:
    lines = [f"# Time-based roofline report: {r.machine}", ""]
    if not r.entries:
        lines.append("_No entries._")
        return "\n".join(lines) + "\n"
    columns = ("param", "ai", "class", "measured_sec", "bound_sec", "gap", "attained_flops",
               "overhead_share", "zero_ai_share", "binding")
    groups = {}
    for e in r.entries:
        groups.setdefault(e.series, []).append(e)
    for name, entries in groups.items():
        kind = "PREDICTED" if entries[0].predicted else "MEASURED"
        lines += [f"## {name} ({kind})", "",
                  "| " + " | ".join(columns) + " |",
                  "|" + "---|" * len(columns)]
        notes = []
        for e in entries:
            d = e.to_dict()
            lines.append("| " + " | ".join(_g6(d[c]) for c in columns) + " |")
            for flag in e.flags:
                notes.append(f"- param {_g6(e.param)}: {flag}")
        bindings = sorted({e.binding for e in entries})
        lines.append("")
        for b in bindings:
            rec = next(e.recommendation for e in entries if e.binding == b)
            lines.append(f"- bound by {b}: {rec}")
        if notes:
            lines += ["", "Flags:"] + notes
        lines.append("")
    return "\n".join(lines)


def serialize_report(r: AnalysisReport, fmt: str = "json") -> str:
    if fmt == "json":
        return report_to_json(r)
    if fmt == "markdown":
        return report_to_markdown(r)
    raise ValueError(f"unknown report format {fmt!r}")


def report_from_json(text: str) -> AnalysisReport:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "machine" not in doc or "entries" not in doc:
        raise SchemaError("", "report needs 'machine' and 'entries'")
    entries = []
    for i, d in enumerate(doc["entries"]):
        missing = [k for k in ENTRY_KEYS if k not in d]
        if missing:
            raise SchemaError(f"entries[{i}].{missing[0]}", "missing required key")

        def num(key):
            return math.inf if d[key] is None else d[key]

        entries.append(ReportEntry(
            series=d["series"], param=num("param"), ai=num("ai"), classification=BoundClass(d["class"]),
            measured_sec=num("measured_sec"), bound_sec=num("bound_sec"), gap=num("gap"),
            attained_flops=num("attained_flops"), overhead_share=num("overhead_share"),
            zero_ai_share=num("zero_ai_share"), binding=d["binding"], predicted=d["predicted"],
        ))
    return AnalysisReport(doc["machine"], tuple(entries))
