"""Time-based roofline: bounds, complexity and time planes, classification.

Conventions used throughout:

* ``ai`` is FLOPs per Byte; zero-byte work has ``ai == inf``, zero-FLOP work ``ai == 0``.
* An arithmetic intensity equal to the machine balance counts as compute-bound.
* Overhead comparisons are inclusive (``<=``).
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .errors import InvariantError
from .machine import ComputeCeiling, MachineSpec, MemoryCeiling, machine_balance
from .profiles import KernelAggregate, zero_ai_share


class BoundClass(str, enum.Enum):
    COMPUTE = "ComputeBound"
    BANDWIDTH = "BandwidthBound"
    OVERHEAD = "OverheadBound"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ComplexityPoint:
    cc: float  # FLOPs
    bc: float  # Bytes

    def __post_init__(self):
        if not (self.cc >= 0 and self.bc >= 0):
            raise ValueError(f"complexities must be >= 0, got cc={self.cc!r} bc={self.bc!r}")


@dataclass(frozen=True)
class TimePoint:
    compute_time_sec: float
    bandwidth_time_sec: float

    def __post_init__(self):
        if not (self.compute_time_sec >= 0 and self.bandwidth_time_sec >= 0):
            raise ValueError("time coordinates must be >= 0")


@dataclass(frozen=True)
class AnalyzedKernel:
    label: str
    complexity: ComplexityPoint
    measured_time_sec: float
    invocations: int
    ai: float
    machine_balance: float
    classification: BoundClass
    time: TimePoint
    bound_runtime_sec: float
    roofline_gap: float
    attained_flops_per_sec: float
    overhead_sec: float
    binding: str = ""
    zero_ai_share: float = 0.0
    compute_ceiling: str = ""
    memory_ceiling: str = ""
    anomalies: Tuple[str, ...] = field(default=())

    def open_symbol(self, peak_flops: float, peak_bw: float) -> Tuple[float, float]:
        """(bandwidth-time x peak B/s, compute-time x peak FLOP/s): the 4D chart's open marker."""
        return self.time.bandwidth_time_sec * peak_bw, self.time.compute_time_sec * peak_flops

    @property
    def closed_symbol(self) -> Tuple[float, float]:
        return self.complexity.bc, self.complexity.cc

    @property
    def overhead_share(self) -> float:
        return self.overhead_sec / self.measured_time_sec


def arithmetic_intensity(c: ComplexityPoint) -> float:
    if c.cc == 0:
        return 0.0
    if c.bc == 0:
        return math.inf
    return c.cc / c.bc


def total_overhead(invocations: int, machine: MachineSpec) -> float:
    if invocations < 0:
        raise ValueError("invocations must be >= 0")
    return invocations * machine.launch_overhead_sec


def roofline_bound_flops(ai: float, c: ComputeCeiling, m: MemoryCeiling, cc: float, t_overhead: float) -> float:
    """Attainable FLOP/s: min of compute peak, bandwidth x AI, and the overhead ceiling cc / t_overhead."""
    if ai < 0 or t_overhead < 0:
        raise ValueError("ai and t_overhead must be >= 0")
    overhead_ceiling = math.inf if t_overhead == 0 else cc / t_overhead
    return min(c.flops_per_sec, m.bytes_per_sec * ai, overhead_ceiling)


def overhead_escape_complexity(peak_flops: float, t_overhead: float) -> float:
    """FLOPs at which the overhead ceiling cc / t_overhead reaches ``peak_flops``.

    Below this much work the kernel cannot reach peak no matter how it is written.
    """
    return peak_flops * t_overhead


def _bound_terms(c: ComplexityPoint, comp: ComputeCeiling, mem: MemoryCeiling, t_overhead: float):
    return (
        (c.cc / comp.flops_per_sec, f"compute ceiling {comp.label}"),
        (c.bc / mem.bytes_per_sec, f"memory ceiling {mem.label}"),
        (t_overhead, "launch overhead"),
    )


def bound_runtime(c: ComplexityPoint, comp: ComputeCeiling, mem: MemoryCeiling, t_overhead: float) -> float:
    """Minimum runtime the model permits, assuming perfect overlap of compute, memory and overhead."""
    return max(t for t, _ in _bound_terms(c, comp, mem, t_overhead))


def binding_constraint(c: ComplexityPoint, comp: ComputeCeiling, mem: MemoryCeiling, t_overhead: float) -> str:
    """Name of the term that sets :func:`bound_runtime`. Ties resolve overhead, then compute."""
    terms = _bound_terms(c, comp, mem, t_overhead)
    best = max(t for t, _ in terms)
    for t, name in (terms[2], terms[0], terms[1]):
        if t == best:
            return name
    raise InvariantError("no binding term")  # pragma: no cover


def time_coordinates(measured_time: float, ai: float, mb: float) -> TimePoint:
    """Split a runtime into (compute time, bandwidth time).

    The dominant resource is charged the full runtime; the other one is scaled
    down by ai/mb (or mb/ai), so ``max(ct, bt) == measured_time`` and
    ``ct / bt == ai / mb``.
    """
    if not measured_time > 0:
        raise ValueError("measured_time must be > 0")
    if ai < 0 or not mb > 0:
        raise ValueError("ai must be >= 0 and mb > 0")
    if math.isinf(ai):
        return TimePoint(measured_time, 0.0)
    if ai >= mb:
        return TimePoint(measured_time, measured_time * (mb / ai))
    ct = measured_time * (ai / mb)
    if ct >= measured_time:
        # rounding must not turn a bandwidth-bound point into a tie
        ct = math.nextafter(measured_time, 0.0)
    return TimePoint(ct, measured_time)


def classify(time: TimePoint, t_overhead: float) -> BoundClass:
    ct, bt = time.compute_time_sec, time.bandwidth_time_sec
    if ct <= t_overhead and bt <= t_overhead:
        return BoundClass.OVERHEAD
    if bt > ct:
        return BoundClass.BANDWIDTH
    return BoundClass.COMPUTE


def complexity_plane_region(c: ComplexityPoint, comp: ComputeCeiling, mem: MemoryCeiling,
                            t_overhead: float) -> BoundClass:
    if c.cc <= comp.flops_per_sec * t_overhead and c.bc <= mem.bytes_per_sec * t_overhead:
        return BoundClass.OVERHEAD
    if arithmetic_intensity(c) >= machine_balance(comp, mem):
        return BoundClass.COMPUTE
    return BoundClass.BANDWIDTH


def analyze(agg: KernelAggregate, machine: MachineSpec, compute_label: Optional[str] = None,
            memory_label: Optional[str] = None, label: str = "",
            ai: Optional[float] = None) -> AnalyzedKernel:
    """Place one aggregated workload on all four roofline views.

    ``ai`` defaults to cc/bc; pass an independently measured intensity to override it.
    """
    if not agg.total_time_sec > 0:
        raise ValueError(f"{label or 'workload'}: measured time must be > 0")
    comp = machine.compute(compute_label)
    mem = machine.memory(memory_label)
    point = ComplexityPoint(agg.computational_complexity, agg.bandwidth_complexity)
    ai = arithmetic_intensity(point) if ai is None else ai
    mb = machine_balance(comp, mem)
    t_ov = total_overhead(agg.total_invocations, machine)
    measured = agg.total_time_sec
    tp = time_coordinates(measured, ai, mb)
    bound = bound_runtime(point, comp, mem, t_ov)
    cls = classify(tp, t_ov)

    anomalies = []
    if max(tp.compute_time_sec, tp.bandwidth_time_sec) != measured:
        raise InvariantError("time coordinates lost the measured runtime")
    if bound > 0 and cls is not BoundClass.OVERHEAD:
        roof = max(point.cc / comp.flops_per_sec, point.bc / mem.bytes_per_sec)
        if measured < roof * (1 - 1e-12):
            anomalies.append("open symbol below closed symbol: measured runtime beats the roofline "
                             "(cache reuse or mis-attributed traffic)")

    return AnalyzedKernel(
        label=label,
        complexity=point,
        measured_time_sec=measured,
        invocations=agg.total_invocations,
        ai=ai,
        machine_balance=mb,
        classification=cls,
        time=tp,
        bound_runtime_sec=bound,
        roofline_gap=measured / bound if bound > 0 else math.inf,
        attained_flops_per_sec=point.cc / measured,
        overhead_sec=t_ov,
        binding=binding_constraint(point, comp, mem, t_ov),
        zero_ai_share=zero_ai_share(agg),
        compute_ceiling=comp.label,
        memory_ceiling=mem.label,
        anomalies=tuple(anomalies),
    )
