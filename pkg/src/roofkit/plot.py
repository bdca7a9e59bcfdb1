"""Deterministic SVG rendering of the four roofline chart kinds.

Layout is fixed so that goldens stay stable: a 960x720 px canvas, axes at
:data:`AXES_RECT` (figure fractions), 12 pt sans-serif text kept as SVG
``<text>``, series colors taken from :data:`PALETTE` in series order.

Log axes cannot show zero (or infinite) coordinates. Such values are drawn at
``axis_min * (1 + ZERO_CLAMP)`` (or ``axis_max / (1 + ZERO_CLAMP)``) with a
hollow cross marker instead of the series marker.
"""

import enum
import io
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.ticker import NullLocator  # noqa: E402

from .machine import MachineSpec, machine_balance  # noqa: E402
from .sweep import SweepSeries  # noqa: E402

CANVAS_PX = (960, 720)
AXES_RECT = (0.10, 0.09, 0.78, 0.80)  # left, bottom, width, height
ZERO_CLAMP = 1e-2
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
RC = {
    "font.family": "sans-serif",
    "font.sans-serif": ["DejaVu Sans"],
    "font.size": 12,
    "svg.fonttype": "none",
    "svg.hashsalt": "roofkit",
    "axes.unicode_minus": False,
    "path.simplify": False,
}

Range = Tuple[float, float]


class ChartKind(str, enum.Enum):
    CLASSIC = "classic"
    COMPLEXITY = "complexity"
    TIME = "time"
    COMPLEXITY_TIME_4D = "4d"


@dataclass(frozen=True)
class ChartSpec:
    kind: ChartKind
    machine: MachineSpec
    series: Tuple[SweepSeries, ...]
    compute_labels: Tuple[str, ...] = ()
    memory_label: Optional[str] = None
    x_range: Optional[Range] = None
    y_range: Optional[Range] = None
    title: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ChartKind(self.kind))
        object.__setattr__(self, "series", tuple(self.series))
        object.__setattr__(self, "compute_labels", tuple(self.compute_labels))
        if not self.series:
            raise ValueError("chart needs at least one series")
        for s in self.series:
            if s.machine != self.machine:
                raise ValueError(f"series {s.series_label!r} belongs to machine {s.machine.name!r}")
        for name, r in (("x", self.x_range), ("y", self.y_range)):
            if r is not None and not (0 < r[0] < r[1]):
                raise ValueError(f"{name} axis range must satisfy 0 < min < max, got {r}")
        for label in self.compute_labels:
            self.machine.compute(label)
        if self.memory_label is not None:
            self.machine.memory(self.memory_label)

    @property
    def ceilings(self):
        labels = self.compute_labels or (self.series[0].kernels[0].compute_ceiling or None,)
        comps = [self.machine.compute(label) for label in labels]
        mem_label = self.memory_label or self.series[0].kernels[0].memory_ceiling or None
        return comps, self.machine.memory(mem_label)


def decade_range(values: Sequence[float]) -> Range:
    """Smallest decade-aligned range holding ``values``, padded by one decade on each side."""
    finite = [v for v in values if v > 0 and math.isfinite(v)]
    if not finite:
        return (1e-1, 1e1)
    lo = math.floor(math.log10(min(finite)) + 1e-9) - 1
    hi = math.ceil(math.log10(max(finite)) - 1e-9) + 1
    return (10.0 ** lo, 10.0 ** hi)


def _overheads(series: Sequence[SweepSeries]) -> List[float]:
    return sorted({k.overhead_sec for s in series for k in s.kernels if k.overhead_sec > 0})


def _points(s: SweepSeries, kind: ChartKind, peak: float, bw: float):
    """(closed, open) coordinate lists for one series; open is empty except for 4d."""
    closed, opened = [], []
    for k in s.kernels:
        if kind is ChartKind.CLASSIC:
            closed.append((k.ai, k.attained_flops_per_sec))
        elif kind is ChartKind.TIME:
            closed.append((k.time.bandwidth_time_sec, k.time.compute_time_sec))
        else:
            closed.append(k.closed_symbol)
            if kind is ChartKind.COMPLEXITY_TIME_4D:
                opened.append(k.open_symbol(peak, bw))
    return closed, opened


def auto_range(series: Sequence[SweepSeries], kind, compute_labels: Sequence[str] = (),
               memory_label: Optional[str] = None) -> Tuple[Range, Range]:
    """Decade-aligned (x, y) ranges covering data, overhead regions and ceiling intersections."""
    kind = ChartKind(kind)
    if not series:
        raise ValueError("auto_range needs at least one series")
    spec = ChartSpec(kind, series[0].machine, tuple(series), tuple(compute_labels), memory_label)
    comps, mem = spec.ceilings
    xs, ys = [], []
    for s in series:
        closed, opened = _points(s, kind, comps[0].flops_per_sec, mem.bytes_per_sec)
        for x, y in closed + opened:
            xs.append(x)
            ys.append(y)
    overheads = _overheads(series)
    if kind is ChartKind.CLASSIC:
        for c in comps:
            xs.append(machine_balance(c, mem))
            ys.append(c.flops_per_sec)
    elif kind is ChartKind.TIME:
        xs += overheads
        ys += overheads
    else:
        for t in overheads:
            xs.append(mem.bytes_per_sec * t)
            ys.extend(c.flops_per_sec * t for c in comps)
    return decade_range(xs), decade_range(ys)


def _clamp(v: float, r: Range) -> Tuple[float, bool]:
    if v <= 0:
        return r[0] * (1 + ZERO_CLAMP), True
    if math.isinf(v):
        return r[1] / (1 + ZERO_CLAMP), True
    return v, False


def _inside(v: float, r: Range) -> bool:
    return r[0] <= v <= r[1]


def _draw_series_markers(ax, pts, xr, yr, color, gid, marker, filled, linestyle, label):
    """Trendline through all points plus one marker per in-range point."""
    plotted, clamped = [], []
    for x, y in pts:
        cx, fx = _clamp(x, xr)
        cy, fy = _clamp(y, yr)
        if not (_inside(cx, xr) and _inside(cy, yr)):
            continue
        (clamped if fx or fy else plotted).append((cx, cy))
    line = [(_clamp(x, xr)[0], _clamp(y, yr)[0]) for x, y in pts]
    if len(line) > 1:
        ax.plot([p[0] for p in line], [p[1] for p in line], color=color, linestyle=linestyle,
                linewidth=1.5, gid=f"{gid}-trend")
    face = color if filled else "none"
    if plotted:
        ax.plot([p[0] for p in plotted], [p[1] for p in plotted], linestyle="none", marker=marker,
                markersize=8, markerfacecolor=face, markeredgecolor=color, markeredgewidth=1.5,
                gid=gid, label=label)
    elif label:
        ax.plot([], [], linestyle="none", marker=marker, markerfacecolor=face, markeredgecolor=color, label=label)
    if clamped:
        ax.plot([p[0] for p in clamped], [p[1] for p in clamped], linestyle="none", marker="X",
                markersize=9, fillstyle="none", markeredgecolor=color, markeredgewidth=1.2, gid=f"{gid}-clamped")


def _overhead_region(ax, corner_x, corner_y, xr, yr, color, gid):
    ax.plot([xr[0], corner_x, corner_x], [corner_y, corner_y, yr[0]], color=color, linestyle=":",
            linewidth=1.2, gid=gid)


def _axis_labels(ax, kind: ChartKind):
    if kind is ChartKind.CLASSIC:
        ax.set_xlabel("Arithmetic intensity (FLOPs/Byte)")
        ax.set_ylabel("Performance (FLOP/s)")
    elif kind is ChartKind.TIME:
        ax.set_xlabel("Bandwidth time (s)")
        ax.set_ylabel("Compute time (s)")
    else:
        ax.set_xlabel("Bandwidth complexity (Bytes)")
        ax.set_ylabel("Computational complexity (FLOPs)")


def build_figure(spec: ChartSpec) -> Figure:
    kind = spec.kind
    comps, mem = spec.ceilings
    peak, bw = comps[0].flops_per_sec, mem.bytes_per_sec
    auto_x, auto_y = auto_range(spec.series, kind, [c.label for c in comps], mem.label)
    xr = spec.x_range or auto_x
    yr = spec.y_range or auto_y

    fig = Figure(figsize=(CANVAS_PX[0] / 72, CANVAS_PX[1] / 72), dpi=72)
    FigureCanvasSVG(fig)
    ax = fig.add_axes(AXES_RECT)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlim(*xr)
    ax.set_ylim(*yr)
    _axis_labels(ax, kind)
    if spec.title:
        ax.set_title(spec.title, pad=28 if kind is ChartKind.COMPLEXITY_TIME_4D else 8)
    ax.grid(True, which="major", color="#dddddd", linewidth=0.6)

    overheads_by_series = []
    for s in spec.series:
        t = max((k.overhead_sec for k in s.kernels), default=0.0)
        overheads_by_series.append(t)

    if kind is ChartKind.CLASSIC:
        ridge_max = max(machine_balance(c, mem) for c in comps)
        ax.plot([xr[0], ridge_max], [bw * xr[0], bw * ridge_max], color="black", linewidth=2,
                gid="memory-ceiling", label=f"{mem.label} {bw / 1e9:.1f} GB/s")
        for c in comps:
            ridge = machine_balance(c, mem)
            ax.plot([ridge, xr[1]], [c.flops_per_sec, c.flops_per_sec], color="black", linewidth=2,
                    gid=f"compute-ceiling-{c.label}")
            ax.text(xr[1] / 1.3, c.flops_per_sec * 1.12, f"{c.label} {c.flops_per_sec / 1e12:.2f} TFLOP/s",
                    ha="right", va="bottom", fontsize=10)
        for i, s in enumerate(spec.series):
            finite = [k.complexity.cc / k.overhead_sec for k in s.kernels if k.overhead_sec > 0]
            if finite:
                y = min(finite)
                ax.plot([xr[0], xr[1]], [y, y], color=PALETTE[i % len(PALETTE)], linestyle="-.",
                        linewidth=1.0, gid=f"overhead-ceiling-{i}")
    elif kind is ChartKind.TIME:
        lo, hi = min(xr[0], yr[0]), max(xr[1], yr[1])
        ax.plot([lo, hi], [lo, hi], color="black", linewidth=1.2, gid="time-diagonal")
        e0, e1 = round(math.log10(lo)), round(math.log10(hi))
        for e in range(e0 + 1, e1):
            c = 10.0 ** e
            ax.plot([xr[0], c, c], [c, c, yr[0]], color="#999999", linewidth=0.8, linestyle="--",
                    gid=f"isocurve-{e}")
        for i, t in enumerate(overheads_by_series):
            if t > 0:
                _overhead_region(ax, t, t, xr, yr, PALETTE[i % len(PALETTE)], f"overhead-box-{i}")
    else:
        for c in comps:
            mb = machine_balance(c, mem)
            ax.plot([xr[0], xr[1]], [mb * xr[0], mb * xr[1]], color="black", linewidth=1.5,
                    gid=f"balance-diagonal-{c.label}", label=f"machine balance {c.label} ({mb:.2f})")
        for i, t in enumerate(overheads_by_series):
            if t > 0:
                _overhead_region(ax, bw * t, peak * t, xr, yr, PALETTE[i % len(PALETTE)], f"overhead-box-{i}")
        if kind is ChartKind.COMPLEXITY_TIME_4D:
            top = ax.secondary_xaxis("top", functions=(lambda x: x / bw, lambda t: t * bw))
            top.set_xlabel("Bandwidth time (s)")
            top.xaxis.set_minor_locator(NullLocator())
            right = ax.secondary_yaxis("right", functions=(lambda y: y / peak, lambda t: t * peak))
            right.set_ylabel("Compute time (s)")
            right.yaxis.set_minor_locator(NullLocator())

    for i, s in enumerate(spec.series):
        color = PALETTE[i % len(PALETTE)]
        closed, opened = _points(s, kind, peak, bw)
        tag = "predicted" if s.predicted else "measured"
        _draw_series_markers(ax, closed, xr, yr, color, f"series-{i}-closed", "o", True, "-",
                             f"{s.series_label} ({tag})")
        if opened:
            _draw_series_markers(ax, opened, xr, yr, color, f"series-{i}-open", "o", False, "--", None)

    ax.legend(loc="upper left", fontsize=10, frameon=True)
    return fig


def render_chart(spec: ChartSpec) -> str:
    """Render ``spec`` to a self-contained SVG 1.1 document; identical specs give identical bytes."""
    with matplotlib.rc_context(RC):
        fig = build_figure(spec)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "roofkit"})
    # at 72 dpi one point is one pixel; say so, matplotlib always writes pt
    w, h = CANVAS_PX
    return buf.getvalue().replace(f'width="{w}pt" height="{h}pt"', f'width="{w}px" height="{h}px"', 1)


def axes_pixel_box() -> Tuple[float, float, float, float]:
    """Axes extent in SVG pixel coordinates: (x0, y_top, width, height)."""
    left, bottom, width, height = AXES_RECT
    w, h = CANVAS_PX
    return left * w, h - (bottom + height) * h, width * w, height * h


def data_to_svg(x: float, y: float, xr: Range, yr: Range) -> Tuple[float, float]:
    """Forward log-log transform from data to SVG pixel coordinates (y grows downward)."""
    x0, ytop, w, h = axes_pixel_box()
    fx = (math.log10(x) - math.log10(xr[0])) / (math.log10(xr[1]) - math.log10(xr[0]))
    fy = (math.log10(y) - math.log10(yr[0])) / (math.log10(yr[1]) - math.log10(yr[0]))
    return x0 + fx * w, ytop + (1 - fy) * h


def svg_to_data(px: float, py: float, xr: Range, yr: Range) -> Tuple[float, float]:
    x0, ytop, w, h = axes_pixel_box()
    fx = (px - x0) / w
    fy = 1 - (py - ytop) / h
    lx = math.log10(xr[0]) + fx * (math.log10(xr[1]) - math.log10(xr[0]))
    ly = math.log10(yr[0]) + fy * (math.log10(yr[1]) - math.log10(yr[0]))
    return 10 ** lx, 10 ** ly


def chart_ranges(spec: ChartSpec) -> Tuple[Range, Range]:
    comps, mem = spec.ceilings
    auto_x, auto_y = auto_range(spec.series, spec.kind, [c.label for c in comps], mem.label)
    return spec.x_range or auto_x, spec.y_range or auto_y
