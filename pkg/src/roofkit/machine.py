"""Machine characterization: compute ceilings, memory ceilings, launch overhead.

All quantities are stored in SI base units (FLOP/s, B/s, s). Prefixes are a
display concern only.
"""

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

from .errors import SchemaError


@dataclass(frozen=True)
class ComputeCeiling:
    label: str
    flops_per_sec: float

    def __post_init__(self):
        if not self.label:
            raise ValueError("compute ceiling label must be nonempty")
        if not self.flops_per_sec > 0:
            raise ValueError(f"compute ceiling {self.label!r}: flops_per_sec must be > 0")


@dataclass(frozen=True)
class MemoryCeiling:
    label: str
    bytes_per_sec: float

    def __post_init__(self):
        if not self.label:
            raise ValueError("memory ceiling label must be nonempty")
        if not self.bytes_per_sec > 0:
            raise ValueError(f"memory ceiling {self.label!r}: bytes_per_sec must be > 0")


@dataclass(frozen=True)
class MachineSpec:
    """Immutable description of a target machine.

    ``warnings`` carries non-fatal notes produced while loading (for example a
    defaulted launch overhead); it takes no part in equality.
    """

    name: str
    compute_ceilings: Tuple[ComputeCeiling, ...]
    memory_ceilings: Tuple[MemoryCeiling, ...]
    launch_overhead_sec: float = 0.0
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "compute_ceilings", tuple(self.compute_ceilings))
        object.__setattr__(self, "memory_ceilings", tuple(self.memory_ceilings))
        if not self.compute_ceilings:
            raise ValueError("machine needs at least one compute ceiling")
        if not self.memory_ceilings:
            raise ValueError("machine needs at least one memory ceiling")
        for kind, ceilings in (("compute", self.compute_ceilings), ("memory", self.memory_ceilings)):
            labels = [c.label for c in ceilings]
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate {kind} ceiling label")
        if self.launch_overhead_sec < 0:
            raise ValueError("launch_overhead_sec must be >= 0")

    def compute(self, label: Optional[str] = None) -> ComputeCeiling:
        """Compute ceiling by label; the first one when ``label`` is None."""
        if label is None:
            return self.compute_ceilings[0]
        for c in self.compute_ceilings:
            if c.label == label:
                return c
        known = ", ".join(c.label for c in self.compute_ceilings)
        raise KeyError(f"no compute ceiling {label!r} on {self.name} (have: {known})")

    def memory(self, label: Optional[str] = None) -> MemoryCeiling:
        """Memory ceiling by label; the first one (usually HBM) when ``label`` is None."""
        if label is None:
            return self.memory_ceilings[0]
        for m in self.memory_ceilings:
            if m.label == label:
                return m
        known = ", ".join(m.label for m in self.memory_ceilings)
        raise KeyError(f"no memory ceiling {label!r} on {self.name} (have: {known})")


@dataclass(frozen=True)
class TensorCorePeakParams:
    sm_count: int
    tc_per_sm: int
    clock_hz: float
    ops_per_tc_per_cycle: int = 64  # 4x4x4 matrix FMA per cycle
    fma_factor: int = 2

    def __post_init__(self):
        for name in ("sm_count", "tc_per_sm", "ops_per_tc_per_cycle", "fma_factor"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
        if not self.clock_hz > 0:
            raise ValueError(f"clock_hz must be > 0, got {self.clock_hz!r}")


def derive_tensor_core_peak(p: TensorCorePeakParams) -> float:
    """Theoretical Tensor Core throughput in FLOP/s."""
    return p.sm_count * p.tc_per_sm * p.clock_hz * p.ops_per_tc_per_cycle * p.fma_factor


def machine_balance(c: ComputeCeiling, m: MemoryCeiling) -> float:
    """Arithmetic intensity (FLOPs/Byte) at which compute and memory time are equal."""
    return c.flops_per_sec / m.bytes_per_sec


def _require(obj, key, path, kinds):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    full = f"{path}.{key}" if path else key
    if key not in obj:
        raise SchemaError(full, "missing required key")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise SchemaError(full, f"expected {'number' if kinds is not str else 'text'}, got {type(value).__name__}")
    return value


def _positive(obj, key, path):
    value = _require(obj, key, path, (int, float))
    if not value > 0:
        raise SchemaError(f"{path}.{key}", f"must be > 0, got {value!r}")
    return float(value)


def machine_from_dict(doc) -> MachineSpec:
    """Validate a decoded machine document and build a :class:`MachineSpec`."""
    if not isinstance(doc, dict):
        raise SchemaError("", "machine spec must be a JSON object")
    name = _require(doc, "name", "", str)

    def ceiling_list(key):
        items = doc.get(key)
        if items is None:
            raise SchemaError(key, "missing required key")
        if not isinstance(items, list) or not items:
            raise SchemaError(key, "expected a non-empty list")
        return items

    compute, seen = [], set()
    for i, item in enumerate(ceiling_list("compute_ceilings")):
        path = f"compute_ceilings[{i}]"
        label = _require(item, "label", path, str)
        if not label:
            raise SchemaError(f"{path}.label", "must be nonempty")
        if label in seen:
            raise SchemaError(f"{path}.label", f"duplicate label {label!r}")
        seen.add(label)
        compute.append(ComputeCeiling(label, _positive(item, "flops_per_sec", path)))

    memory, seen = [], set()
    for i, item in enumerate(ceiling_list("memory_ceilings")):
        path = f"memory_ceilings[{i}]"
        label = _require(item, "label", path, str)
        if not label:
            raise SchemaError(f"{path}.label", "must be nonempty")
        if label in seen:
            raise SchemaError(f"{path}.label", f"duplicate label {label!r}")
        seen.add(label)
        memory.append(MemoryCeiling(label, _positive(item, "bytes_per_sec", path)))

    warnings = []
    if "launch_overhead_sec" in doc:
        overhead = _require(doc, "launch_overhead_sec", "", (int, float))
        if overhead < 0:
            raise SchemaError("launch_overhead_sec", f"must be >= 0, got {overhead!r}")
        overhead = float(overhead)
    else:
        overhead = 0.0
        warnings.append("launch_overhead_sec missing; defaulted to 0")

    return MachineSpec(name, tuple(compute), tuple(memory), overhead, tuple(warnings))


def load_machine_spec(source: Union[bytes, str]) -> MachineSpec:
    """Parse a machine spec from UTF-8 JSON bytes (or text)."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError("", f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON: {exc}") from None
    return machine_from_dict(doc)


def machine_to_dict(spec: MachineSpec) -> dict:
    return {
        "name": spec.name,
        "compute_ceilings": [{"label": c.label, "flops_per_sec": c.flops_per_sec} for c in spec.compute_ceilings],
        "memory_ceilings": [{"label": m.label, "bytes_per_sec": m.bytes_per_sec} for m in spec.memory_ceilings],
        "launch_overhead_sec": spec.launch_overhead_sec,
    }


def serialize_machine_spec(spec: MachineSpec) -> str:
    return json.dumps(machine_to_dict(spec), indent=2) + "\n"


def read_machine_file(path) -> MachineSpec:
    with open(path, "rb") as fh:
        return load_machine_spec(fh.read())


def format_si(value: float, unit: str, digits: int = 4) -> str:
    """Format with an SI prefix, e.g. ``format_si(1.07479e14, 'FLOP/s') -> '107.5 TFLOP/s'``."""
    if value == 0 or value != value or value in (float("inf"), float("-inf")):
        return f"{value:g} {unit}"
    prefixes = ((1e15, "P"), (1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "k"), (1.0, ""),
                (1e-3, "m"), (1e-6, "u"), (1e-9, "n"))
    for scale, prefix in prefixes:
        if abs(value) >= scale:
            return f"{value / scale:.{digits}g} {prefix}{unit}"
    return f"{value:.{digits}g} {unit}"


def ceilings_summary(spec: MachineSpec, compute_labels: Sequence[str] = ()) -> str:
    lines = [spec.name]
    for c in spec.compute_ceilings:
        if compute_labels and c.label not in compute_labels:
            continue
        lines.append(f"  {c.label:<12} {format_si(c.flops_per_sec, 'FLOP/s')}")
    for m in spec.memory_ceilings:
        lines.append(f"  {m.label:<12} {format_si(m.bytes_per_sec, 'B/s')}")
    lines.append(f"  launch overhead {format_si(spec.launch_overhead_sec, 's')}")
    return "\n".join(lines)
