"""Analytical FLOP and byte counts for Conv2D and LSTM layers.

A multiply-accumulate counts as 2 FLOPs. Byte counts are compulsory traffic:
every input, weight and output element crosses memory exactly once (LSTM
weights optionally once per timestep). Measured traffic will be higher.

The ``*_oracle`` functions evaluate the layer literally and count operations;
they exist to check the closed forms and are only usable at small sizes.
"""

import enum
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .roofline import ComplexityPoint

ORACLE_LIMIT = 10**7


class WeightTraffic(str, enum.Enum):
    STREAMED_PER_STEP = "streamed_per_step"
    RESIDENT_ONCE = "resident_once"


class ConvWeightTraffic(str, enum.Enum):
    ONCE = "once"  # compulsory: the filter bank crosses memory a single time
    PER_SAMPLE = "per_sample"  # re-read for every image in the batch, as batch-tiled kernels do


def _check_int(name, value, lo):
    if isinstance(value, bool) or not isinstance(value, int) or value < lo:
        raise ValueError(f"{name} must be an integer >= {lo}, got {value!r}")


@dataclass(frozen=True)
class Conv2DSpec:
    n: int
    h: int
    w: int
    c_in: int
    k_h: int
    k_w: int
    c_out: int
    stride: int = 1
    padding: int = 0
    elem_bytes: int = 4
    weight_traffic: ConvWeightTraffic = ConvWeightTraffic.ONCE

    def __post_init__(self):
        object.__setattr__(self, "weight_traffic", ConvWeightTraffic(self.weight_traffic))
        for name in ("n", "h", "w", "c_in", "k_h", "k_w", "c_out", "stride"):
            _check_int(name, getattr(self, name), 1)
        _check_int("padding", self.padding, 0)
        if self.elem_bytes not in (2, 4, 8):
            raise ValueError(f"elem_bytes must be 2, 4 or 8, got {self.elem_bytes!r}")
        if self.h + 2 * self.padding < self.k_h or self.w + 2 * self.padding < self.k_w:
            raise ValueError("kernel larger than padded input")


@dataclass(frozen=True)
class LSTMSpec:
    batch: int
    seq_len: int
    input_features: int
    hidden: int
    elem_bytes: int = 4
    weight_traffic: WeightTraffic = WeightTraffic.STREAMED_PER_STEP
    activation_flops: int = 1

    def __post_init__(self):
        for name in ("batch", "seq_len", "input_features", "hidden"):
            _check_int(name, getattr(self, name), 1)
        _check_int("activation_flops", self.activation_flops, 0)
        if self.elem_bytes not in (2, 4, 8):
            raise ValueError(f"elem_bytes must be 2, 4 or 8, got {self.elem_bytes!r}")
        object.__setattr__(self, "weight_traffic", WeightTraffic(self.weight_traffic))


LayerSpec = Union[Conv2DSpec, LSTMSpec]


def conv2d_output_dims(s: Conv2DSpec) -> Tuple[int, int]:
    h_out = (s.h + 2 * s.padding - s.k_h) // s.stride + 1
    w_out = (s.w + 2 * s.padding - s.k_w) // s.stride + 1
    return h_out, w_out


def conv2d_complexity(s: Conv2DSpec) -> ComplexityPoint:
    """FLOPs of the convolution proper (bias and activation excluded) and bytes moved.

    With ``PER_SAMPLE`` weight traffic every term of bc scales with the batch,
    so arithmetic intensity does not depend on ``n`` at all.
    """
    h_out, w_out = conv2d_output_dims(s)
    cc = 2 * s.n * h_out * w_out * s.c_out * s.c_in * s.k_h * s.k_w
    inputs = s.n * s.h * s.w * s.c_in
    weights = s.k_h * s.k_w * s.c_in * s.c_out
    if s.weight_traffic is ConvWeightTraffic.PER_SAMPLE:
        weights *= s.n
    outputs = s.n * h_out * w_out * s.c_out
    return ComplexityPoint(cc, (inputs + weights + outputs) * s.elem_bytes)


def conv2d_flops_oracle(s: Conv2DSpec) -> int:
    """Count FLOPs by evaluating the convolution on all-ones tensors.

    With A == 1 and K == 1 every output element equals the number of products
    accumulated into it, so the sum of the output is the MAC count.
    """
    if s.n * s.h * s.w * s.c_in * s.c_out > ORACLE_LIMIT:
        raise ValueError("instance too large for the counting oracle")
    # padding taps are evaluated like any other tap, so they count as products too
    a = np.ones((s.n, s.h + 2 * s.padding, s.w + 2 * s.padding, s.c_in), dtype=np.int64)
    k = np.ones((s.k_h, s.k_w, s.c_in, s.c_out), dtype=np.int64)
    # every window whose extent fits inside the padded input, origins stepped by stride
    windows = np.lib.stride_tricks.sliding_window_view(a, (s.k_h, s.k_w), axis=(1, 2))
    windows = windows[:, :: s.stride, :: s.stride]
    out = np.einsum("nhwcij,ijcd->nhwd", windows, k)
    return 2 * int(out.sum())


def _lstm_cell_flops(s: LSTMSpec) -> int:
    h, d = s.hidden, s.input_features
    gates = 4 * (2 * h * (h + d) + h)
    elementwise = 3 * h + h
    activations = s.activation_flops * (3 * h + 2 * h)
    return gates + elementwise + activations


def lstm_complexity(s: LSTMSpec) -> ComplexityPoint:
    h, d, T, B = s.hidden, s.input_features, s.seq_len, s.batch
    cc = T * B * _lstm_cell_flops(s)
    weights = 4 * h * (h + d) + 4 * h
    weight_loads = T if s.weight_traffic is WeightTraffic.STREAMED_PER_STEP else 1
    # per step and sample: x_t in, plus h_t/C_t state traffic
    activations = T * B * (d + 4 * h)
    return ComplexityPoint(cc, (weight_loads * weights + activations) * s.elem_bytes)


def lstm_flops_oracle(s: LSTMSpec) -> int:
    """Run the LSTM recurrence on scalars, counting every multiply, add and activation."""
    h, d = s.hidden, s.input_features
    if s.batch * s.seq_len * h * (h + d) > ORACLE_LIMIT:
        raise ValueError("instance too large for the counting oracle")
    act_cost = s.activation_flops
    flops = 0

    def sigmoid(x):
        nonlocal flops
        flops += act_cost
        return 1.0 / (1.0 + math.exp(-x))

    def tanh(x):
        nonlocal flops
        flops += act_cost
        return math.tanh(x)

    # small deterministic parameters; values only keep the arithmetic honest
    weights = [[[0.01 * ((g + 1) * (r + 2) - c) / (h + d) for c in range(h + d)] for r in range(h)] for g in range(4)]
    biases = [[0.001 * (g - r) for r in range(h)] for g in range(4)]

    def gate(g, z):
        nonlocal flops
        out = []
        for r in range(h):
            row = weights[g][r]
            acc = 0.0
            for c in range(h + d):
                acc += row[c] * z[c]
                flops += 2
            acc += biases[g][r]
            flops += 1
            out.append(acc)
        return out

    for b in range(s.batch):
        h_prev = [0.0] * h
        c_prev = [0.0] * h
        for t in range(s.seq_len):
            x_t = [0.1 * ((b + t + j) % 5) for j in range(d)]
            z = h_prev + x_t  # [h_{t-1}, x_t]
            f = [sigmoid(v) for v in gate(0, z)]
            i = [sigmoid(v) for v in gate(1, z)]
            c_hat = [tanh(v) for v in gate(2, z)]
            o = [sigmoid(v) for v in gate(3, z)]
            c_t = []
            for j in range(h):
                c_t.append(f[j] * c_prev[j] + i[j] * c_hat[j])
                flops += 3
            h_t = []
            for j in range(h):
                h_t.append(o[j] * tanh(c_t[j]))
                flops += 1
            h_prev, c_prev = h_t, c_t
    return flops


def lstm_sequential_depth(s: LSTMSpec) -> int:
    """Lower bound on serialized stages: gates, then cell state, then hidden state, per step."""
    return 3 * s.seq_len


def invocation_estimate(s: LayerSpec, kernels_per_step: int, epilogue: int = 0) -> int:
    """Kernel launches for one forward pass: ``kernels_per_step`` for a Conv2D,
    ``kernels_per_step * seq_len + epilogue`` for an LSTM."""
    if kernels_per_step < 1:
        raise ValueError("kernels_per_step must be >= 1")
    if epilogue < 0:
        raise ValueError("epilogue must be >= 0")
    if isinstance(s, LSTMSpec):
        return kernels_per_step * s.seq_len + epilogue
    return kernels_per_step


def layer_complexity(s: LayerSpec) -> ComplexityPoint:
    if isinstance(s, LSTMSpec):
        return lstm_complexity(s)
    return conv2d_complexity(s)
