"""roofkit: time-based roofline analysis for deep learning kernels."""

__version__ = "0.1.0"

from .machine import (ComputeCeiling, MachineSpec, MemoryCeiling, TensorCorePeakParams,  # noqa: E402
                      derive_tensor_core_peak, load_machine_spec, machine_balance)
from .profiles import KernelAggregate, KernelRecord, WorkloadProfile, aggregate, parse_profile_csv  # noqa: E402
from .roofline import (AnalyzedKernel, BoundClass, ComplexityPoint, TimePoint, analyze,  # noqa: E402
                       arithmetic_intensity, bound_runtime, classify, complexity_plane_region,
                       roofline_bound_flops, time_coordinates, total_overhead)
