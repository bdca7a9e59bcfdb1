"""Regenerate the synthetic profiler fixtures under src/roofkit/data/profiles.

The fixtures imitate canonical CSV exports for the LSTM and Conv2D forward
passes on a V100. They are synthetic. Invocation totals are 36 (PyTorch), 277
(TF1) and 243 (TF2) per LSTM forward pass; FLOP and byte counts follow from the
layer shapes. Times are invented so that the LSTM runs sit inside the launch
overhead box and the Conv2D runs are compute-bound.

    python scripts/make_fixtures.py
"""

import math
import os

from roofkit.cost_models import Conv2DSpec, conv2d_complexity, conv2d_output_dims
from roofkit.profiles import KernelRecord, WorkloadProfile, serialize_profile_csv

ROOT = os.path.join(os.path.dirname(__file__), os.pardir, "src", "roofkit", "data", "profiles")

T, D, H = 16, 32, 16  # default sequence length, input features, hidden size
FP16 = 2


def _k(name, inv, time_us, **counts):
    return KernelRecord(name, inv, round(time_us * 1000) / 1e9, **counts)


def lstm_pytorch(batch):
    grow = 1 + 0.002 * math.log2(batch / 16)
    rows = []
    gate_flops = 2 * batch * 4 * H * (H + D)
    weight_bytes = (4 * H * (H + D) + 4 * H) * FP16
    for _ in range(T):
        rows.append(_k("gemmSN_TN_kernel", 1, 3.0 * grow, flops_fp32=gate_flops,
                       bytes_read=weight_bytes + batch * (H + D) * FP16, bytes_written=batch * 4 * H * FP16))
        rows.append(_k("LSTM_elementWise_fp", 1, 2.6 * grow, flops_fp32=batch * 13 * H,
                       bytes_read=batch * 5 * H * FP16, bytes_written=batch * 2 * H * FP16))
    for _ in range(2):
        rows.append(_k("volta_fp16_s884gemm_fp16_128x64_ldg8_f2f_tn", 1, 3.4 * grow,
                       flops_tensor=2 * batch * T * 4 * H * D,
                       bytes_read=batch * T * D * FP16 + 4 * H * D * FP16, bytes_written=batch * T * 4 * H * FP16))
    for _ in range(2):
        rows.append(_k("unrolled_elementwise_kernel<copy>", 1, 2.2 * grow,
                       bytes_read=batch * T * D * FP16, bytes_written=batch * T * D * FP16))
    return rows


def lstm_tf(batch, flavour):
    grow = 1 + 0.002 * math.log2(batch / 16)
    gate_flops = 2 * batch * 4 * H * (H + D)
    weight_bytes = (4 * H * (H + D) + 4 * H) * FP16
    if flavour == "tf1":
        gemm = _k("volta_fp16_s884gemm_fp16_64x64_ldg8_f2f_nn", T, T * 3.1 * grow, flops_tensor=T * gate_flops,
                  bytes_read=T * (weight_bytes + batch * (H + D) * FP16), bytes_written=T * batch * 4 * H * FP16)
        eigen_inv, zero_inv = 245, 16
    else:
        gemm = _k("gemmSN_NN_kernel", 2 * T, 2 * T * 2.9 * grow, flops_fp32=2 * T * gate_flops,
                  bytes_read=2 * T * (weight_bytes + batch * (H + D) * FP16), bytes_written=2 * T * batch * 4 * H * FP16)
        eigen_inv, zero_inv = 195, 16
    eigen = _k("EigenMetaKernel", eigen_inv, eigen_inv * 2.7 * grow, flops_fp32=eigen_inv * batch * H,
               bytes_read=eigen_inv * batch * 4 * H * FP16, bytes_written=eigen_inv * batch * 2 * H * FP16)
    zero = _k("EigenMetaKernel<TensorAssignOp>", zero_inv, zero_inv * 2.3 * grow,
              bytes_read=zero_inv * batch * H * FP16, bytes_written=zero_inv * batch * H * FP16)
    return [gemm, eigen, zero]


def conv2d_pytorch(batch):
    spec = Conv2DSpec(n=batch, h=112, w=112, c_in=64, k_h=3, k_w=3, c_out=256, stride=2, padding=0, elem_bytes=FP16)
    point = conv2d_complexity(spec)
    h_out, w_out = conv2d_output_dims(spec)
    inputs = spec.n * spec.h * spec.w * spec.c_in * FP16
    weights = spec.k_h * spec.k_w * spec.c_in * spec.c_out * FP16
    outputs = spec.n * h_out * w_out * spec.c_out * FP16
    conv_time_us = point.cc / 107.47904e12 * 1e6 * 2.2
    return [
        _k("volta_fp16_s884cudnn_fp16_256x128_ldg8_relu_f2f_exp_small_nhwc_tn_v1", 1, conv_time_us,
           flops_tensor=point.cc, bytes_read=int(1.1 * (inputs + weights)), bytes_written=outputs),
        _k("nchwToNhwcKernel", 1, 4.9, bytes_read=weights, bytes_written=weights),
        _k("cudnn::gemm::computeOffsetsKernel", 1, 3.1, bytes_read=0, bytes_written=1024),
    ]


def write(path, rows):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(serialize_profile_csv(WorkloadProfile("", rows)))


def main():
    for batch in (16, 32, 64, 128):
        write(os.path.join(ROOT, "lstm", "pytorch", f"batch={batch}.csv"), lstm_pytorch(batch))
        write(os.path.join(ROOT, "lstm", "tf1", f"batch={batch}.csv"), lstm_tf(batch, "tf1"))
        write(os.path.join(ROOT, "lstm", "tf2", f"batch={batch}.csv"), lstm_tf(batch, "tf2"))
    for batch in (16, 32, 64):
        write(os.path.join(ROOT, "conv2d", "pytorch", f"batch={batch}.csv"), conv2d_pytorch(batch))


if __name__ == "__main__":
    main()
