"""Single-parameter sweeps: analytical (model-predicted) and measured series.

Profile labels follow a small grammar: comma-separated ``key=value`` pairs,
e.g. ``batch=16`` or ``framework=tf1,batch=64``. Measured series pick one key
as their sweep parameter.
"""

import dataclasses
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .cost_models import Conv2DSpec, LayerSpec, LSTMSpec, invocation_estimate, layer_complexity
from .errors import SchemaError
from .machine import MachineSpec
from .profiles import KernelAggregate, WorkloadProfile, aggregate
from .roofline import AnalyzedKernel, analyze, bound_runtime, total_overhead

CONV2D_ALIASES = {"batch": ("n",), "filters": ("c_out",), "kernel_size": ("k_h", "k_w"), "k": ("k_h", "k_w")}
LSTM_ALIASES = {"sequence_length": ("seq_len",), "features": ("input_features",), "hidden_size": ("hidden",)}


@dataclass(frozen=True)
class SweepSeries:
    series_label: str
    parameter_name: str
    points: Tuple[Tuple[float, AnalyzedKernel], ...]
    machine: MachineSpec
    predicted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError(f"series {self.series_label!r} has no points")
        values = [v for v, _ in self.points]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"series {self.series_label!r}: parameter values must be strictly increasing")

    @property
    def values(self) -> List[float]:
        return [v for v, _ in self.points]

    @property
    def kernels(self) -> List[AnalyzedKernel]:
        return [k for _, k in self.points]


def _resolve_fields(template: LayerSpec, parameter_name: str) -> Tuple[str, ...]:
    aliases = LSTM_ALIASES if isinstance(template, LSTMSpec) else CONV2D_ALIASES
    names = aliases.get(parameter_name, (parameter_name,))
    known = {f.name for f in dataclasses.fields(template)}
    for name in names:
        if name not in known:
            raise KeyError(f"{type(template).__name__} has no parameter {parameter_name!r}")
    return names


def predicted_point(spec: LayerSpec, machine: MachineSpec, compute_label: Optional[str] = None,
                    memory_label: Optional[str] = None, kernels_per_step: int = 1, epilogue: int = 0,
                    label: str = "") -> AnalyzedKernel:
    """Analyze a layer spec with its model-bound runtime standing in for a measurement."""
    point = layer_complexity(spec)
    invocations = invocation_estimate(spec, kernels_per_step, epilogue)
    t_ov = total_overhead(invocations, machine)
    t = bound_runtime(point, machine.compute(compute_label), machine.memory(memory_label), t_ov)
    agg = KernelAggregate(point.cc, point.bc, t, invocations, 0.0)
    return analyze(agg, machine, compute_label, memory_label, label=label)


def run_analytical_sweep(template: LayerSpec, parameter_name: str, values: Sequence, machine: MachineSpec,
                         compute_label: Optional[str] = None, memory_label: Optional[str] = None,
                         kernels_per_step: int = 1, epilogue: int = 0,
                         series_label: Optional[str] = None) -> SweepSeries:
    names = _resolve_fields(template, parameter_name)
    ordered = sorted(values)
    if len(set(ordered)) != len(ordered):
        raise ValueError(f"duplicate values in sweep over {parameter_name!r}")
    specs, problems = [], []
    for v in ordered:
        try:
            specs.append((v, dataclasses.replace(template, **{n: v for n in names})))
        except ValueError as exc:
            problems.append(f"{parameter_name}={v}: {exc}")
    if problems:
        raise ValueError("; ".join(problems))
    label = series_label or f"{type(template).__name__} {parameter_name}"
    points = [(v, predicted_point(s, machine, compute_label, memory_label, kernels_per_step, epilogue,
                                  label=f"{parameter_name}={v}"))
              for v, s in specs]
    return SweepSeries(label, parameter_name, tuple(points), machine, predicted=True)


def parse_label(label: str) -> Dict[str, str]:
    """``"framework=tf1,batch=64"`` -> ``{"framework": "tf1", "batch": "64"}``."""
    pairs = {}
    for part in label.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        if not sep:
            continue
        pairs[key.strip()] = value.strip()
    return pairs


def label_value(label: str, key: str) -> float:
    pairs = parse_label(label)
    if key not in pairs:
        raise SchemaError(key, f"profile label {label!r} has no {key!r}")
    try:
        return float(pairs[key])
    except ValueError:
        raise SchemaError(key, f"profile label {label!r}: {key} is not numeric") from None


def build_measured_series(profiles: Sequence[WorkloadProfile], parameter_name: str, machine: MachineSpec,
                          compute_label: Optional[str] = None, memory_label: Optional[str] = None,
                          series_label: str = "") -> SweepSeries:
    keyed = [(label_value(p.label, parameter_name), p) for p in profiles]
    keyed.sort(key=lambda item: item[0])
    for (a, pa), (b, pb) in zip(keyed, keyed[1:]):
        if a == b:
            raise SchemaError(parameter_name, f"duplicate {parameter_name}={a:g} in profiles {pa.label!r} and {pb.label!r}")
    points = [(v, analyze(aggregate(p), machine, compute_label, memory_label, label=p.label)) for v, p in keyed]
    return SweepSeries(series_label or parameter_name, parameter_name, tuple(points), machine, predicted=False)


def common_parameter(labels: Sequence[str]) -> Optional[str]:
    """The single key present in every label, if there is exactly one."""
    keys = None
    for label in labels:
        k = set(parse_label(label))
        keys = k if keys is None else keys & k
    if keys and len(keys) == 1:
        return next(iter(keys))
    return None


@dataclass(frozen=True)
class SweepConfig:
    layer: str
    template: LayerSpec
    parameter: str
    values: Tuple[float, ...]
    kernels_per_step: int = 1
    epilogue_invocations: int = 0
    label: str = ""


def _layer_template(layer: str, fields, path: str) -> LayerSpec:
    cls = {"conv2d": Conv2DSpec, "lstm": LSTMSpec}.get(layer)
    if cls is None:
        raise SchemaError(f"{path}layer", f"expected 'conv2d' or 'lstm', got {layer!r}")
    if not isinstance(fields, dict):
        raise SchemaError(f"{path}template", "expected an object")
    try:
        return cls(**fields)
    except TypeError as exc:
        raise SchemaError(f"{path}template", str(exc)) from None
    except ValueError as exc:
        raise SchemaError(f"{path}template", str(exc)) from None


def sweep_config_from_dict(doc, path: str = "") -> SweepConfig:
    if not isinstance(doc, dict):
        raise SchemaError(path.rstrip("."), "expected an object")
    for key in ("layer", "template", "parameter", "values"):
        if key not in doc:
            raise SchemaError(f"{path}{key}", "missing required key")
    template = _layer_template(doc["layer"], doc["template"], path)
    values = doc["values"]
    if not isinstance(values, list) or not values or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise SchemaError(f"{path}values", "expected a non-empty list of numbers")
    return SweepConfig(
        layer=doc["layer"],
        template=template,
        parameter=doc["parameter"],
        values=tuple(values),
        kernels_per_step=int(doc.get("kernels_per_step", 1)),
        epilogue_invocations=int(doc.get("epilogue_invocations", 0)),
        label=str(doc.get("label", "")),
    )


def load_sweep_configs(source) -> List[SweepConfig]:
    """Parse a sweep config document: one config object or a list of them."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON: {exc}") from None
    if isinstance(doc, list):
        return [sweep_config_from_dict(d, f"[{i}].") for i, d in enumerate(doc)]
    return [sweep_config_from_dict(doc)]


def run_sweep_config(cfg: SweepConfig, machine: MachineSpec, compute_label: Optional[str] = None,
                     memory_label: Optional[str] = None) -> SweepSeries:
    try:
        return run_analytical_sweep(cfg.template, cfg.parameter, cfg.values, machine, compute_label,
                                    memory_label, cfg.kernels_per_step, cfg.epilogue_invocations,
                                    series_label=cfg.label or f"{cfg.layer} {cfg.parameter}")
    except KeyError as exc:
        raise SchemaError("parameter", exc.args[0]) from None
    except ValueError as exc:
        raise SchemaError("values", str(exc)) from None
