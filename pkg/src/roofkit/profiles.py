"""Per-kernel profiler exports and their aggregation into workload totals.

The canonical CSV layout (one row per kernel, counts summed over all
invocations) is::

    kernel_name,invocations,time_ns,flops_fp64,flops_fp32,flops_fp16,flops_tensor,bytes_read,bytes_written

An Nsight Compute export maps onto it as: ``gpu__time_duration.sum`` ->
time_ns, the ``sm__sass_thread_inst_executed_op_*`` FLOP counts (FMA counted
twice) -> flops_fp64/fp32/fp16, ``sm__inst_executed_pipe_tensor`` x 512 ->
flops_tensor, ``dram__bytes_read.sum`` / ``dram__bytes_write.sum`` -> bytes.
"""

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Mapping, Optional, Union

from .errors import SchemaError

CSV_COLUMNS = (
    "kernel_name",
    "invocations",
    "time_ns",
    "flops_fp64",
    "flops_fp32",
    "flops_fp16",
    "flops_tensor",
    "bytes_read",
    "bytes_written",
)
FLOP_FIELDS = ("flops_fp64", "flops_fp32", "flops_fp16", "flops_tensor")
BYTE_FIELDS = ("bytes_read", "bytes_written")


@dataclass(frozen=True)
class KernelRecord:
    kernel_name: str
    invocations: int
    total_time_sec: float
    flops_fp64: int = 0
    flops_fp32: int = 0
    flops_fp16: int = 0
    flops_tensor: int = 0
    bytes_read: int = 0
    bytes_written: int = 0

    def __post_init__(self):
        if self.invocations < 1:
            raise ValueError(f"{self.kernel_name}: invocations must be >= 1")
        if self.total_time_sec < 0:
            raise ValueError(f"{self.kernel_name}: total_time_sec must be >= 0")
        for name in FLOP_FIELDS + BYTE_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"{self.kernel_name}: {name} must be >= 0")

    @property
    def flops(self) -> int:
        return self.flops_fp64 + self.flops_fp32 + self.flops_fp16 + self.flops_tensor

    @property
    def bytes(self) -> int:
        return self.bytes_read + self.bytes_written

    @property
    def time_per_invocation_sec(self) -> float:
        return self.total_time_sec / self.invocations


@dataclass(frozen=True)
class WorkloadProfile:
    label: str
    kernels: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "kernels", tuple(self.kernels))


@dataclass(frozen=True)
class KernelAggregate:
    computational_complexity: float
    bandwidth_complexity: float
    total_time_sec: float
    total_invocations: int
    zero_ai_bytes: float = 0.0

    def __add__(self, other: "KernelAggregate") -> "KernelAggregate":
        return KernelAggregate(
            self.computational_complexity + other.computational_complexity,
            self.bandwidth_complexity + other.bandwidth_complexity,
            self.total_time_sec + other.total_time_sec,
            self.total_invocations + other.total_invocations,
            self.zero_ai_bytes + other.zero_ai_bytes,
        )


def _parse_count(text: str, column: str, line: int) -> int:
    try:
        value = float(text)
    except ValueError:
        raise SchemaError(f"line {line}.{column}", f"non-numeric value {text!r}") from None
    if not math.isfinite(value) or value != int(value):
        raise SchemaError(f"line {line}.{column}", f"expected an integer count, got {text!r}")
    if value < 0:
        raise SchemaError(f"line {line}.{column}", f"negative value {text!r}")
    # exact for plain integer literals; float route only for exponent notation
    return int(text) if text.strip().lstrip("+").isdigit() else int(value)


def parse_profile_csv(source: Union[bytes, str], label: str = "") -> WorkloadProfile:
    """Parse a canonical per-kernel CSV export. A header-only file is an empty profile."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise SchemaError("", f"not UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(source))
    header = next(reader, None)
    if header is None:
        raise SchemaError("header", "empty file (expected a header row)")
    header = [h.strip() for h in header]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise SchemaError("header", f"missing column {missing[0]!r}")
    extra = [h for h in header if h not in CSV_COLUMNS]
    if extra:
        raise SchemaError("header", f"unexpected column {extra[0]!r}")
    index = {name: header.index(name) for name in CSV_COLUMNS}

    kernels = []
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise SchemaError(f"line {line}", f"expected {len(header)} cells, got {len(row)}")
        cells = {name: row[i].strip() for name, i in index.items()}
        try:
            time_ns = float(cells["time_ns"])
        except ValueError:
            raise SchemaError(f"line {line}.time_ns", f"non-numeric value {cells['time_ns']!r}") from None
        if not math.isfinite(time_ns) or time_ns < 0:
            raise SchemaError(f"line {line}.time_ns", f"invalid time {cells['time_ns']!r}")
        counts = {name: _parse_count(cells[name], name, line) for name in ("invocations",) + FLOP_FIELDS + BYTE_FIELDS}
        if counts["invocations"] < 1:
            raise SchemaError(f"line {line}.invocations", "must be >= 1")
        kernels.append(KernelRecord(kernel_name=cells["kernel_name"], total_time_sec=time_ns / 1e9, **counts))
    return WorkloadProfile(label, tuple(kernels))


def serialize_profile_csv(p: WorkloadProfile) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for k in p.kernels:
        writer.writerow([k.kernel_name, k.invocations, repr(round(k.total_time_sec * 1e9, 3))]
                        + [getattr(k, f) for f in FLOP_FIELDS + BYTE_FIELDS])
    return out.getvalue()


def profile_to_dict(p: WorkloadProfile) -> dict:
    return {"label": p.label, "kernels": [asdict(k) for k in p.kernels]}


def profile_from_dict(doc) -> WorkloadProfile:
    if not isinstance(doc, dict) or "kernels" not in doc:
        raise SchemaError("kernels", "missing required key")
    kernels = []
    for i, item in enumerate(doc["kernels"]):
        try:
            kernels.append(KernelRecord(**item))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"kernels[{i}]", str(exc)) from None
    return WorkloadProfile(doc.get("label", ""), tuple(kernels))


def serialize_profile_json(p: WorkloadProfile) -> str:
    return json.dumps(profile_to_dict(p), indent=2) + "\n"


def read_profile(path, label: Optional[str] = None) -> WorkloadProfile:
    """Load a CSV export or a canonical JSON profile. CSV labels default to the file stem."""
    with open(path, "rb") as fh:
        data = fh.read()
    if str(path).endswith(".json"):
        try:
            p = profile_from_dict(json.loads(data.decode("utf-8")))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SchemaError("", f"malformed JSON profile: {exc}") from None
        return WorkloadProfile(label, p.kernels) if label is not None else p
    stem = os.path.splitext(os.path.basename(path))[0]
    return parse_profile_csv(data, label if label is not None else stem)


def aggregate(p: WorkloadProfile, weights: Optional[Mapping[str, float]] = None) -> KernelAggregate:
    """Sum a profile into complexity/time totals.

    FLOPs from every precision pipeline count equally unless ``weights`` maps
    a flops_* field name to another factor.
    """
    weights = weights or {}
    w = [weights.get(f, 1) for f in FLOP_FIELDS]
    cc = bc = t = zero = 0
    inv = 0
    for k in p.kernels:
        flops = sum(wi * getattr(k, f) for wi, f in zip(w, FLOP_FIELDS))
        cc += flops
        bc += k.bytes
        t += k.total_time_sec
        inv += k.invocations
        if k.flops == 0:
            zero += k.bytes
    return KernelAggregate(cc, bc, t, inv, zero)


def zero_ai_share(agg: KernelAggregate) -> float:
    """Fraction of bytes moved by kernels that perform no floating-point work."""
    if agg.bandwidth_complexity == 0:
        return 0.0
    return agg.zero_ai_bytes / agg.bandwidth_complexity


def merge(profiles: Iterable[WorkloadProfile], label: str = "") -> WorkloadProfile:
    kernels: List[KernelRecord] = []
    for p in profiles:
        kernels.extend(p.kernels)
    return WorkloadProfile(label, tuple(kernels))
