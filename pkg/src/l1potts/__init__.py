"""Exact weighted L1-Potts segmentation with an indexed linked histogram."""

from .core import (NO_OFFSET, PottsParams, StepSignal, WeightedSignal, jump_set_distance,
                   l1_distance, potts_energy_l1, potts_energy_l2)
from .deconvolution import (DeconvBounds, InfeasibleBounds, Kernel, SplitParams, SplitReport,
                            convolve_same, deconv_gamma_range, min_kl1potts_split, solve_kl1l1)
from .histogram import IndexedLinkedHistogram
from .oracle import enumerate_exact, naive_dp
from .signals import Grid, NoiseSpec, add_noise, canonical_step_signal, make_kernel
from .solver import (MomentTables, Partition, find_best_partition_l1, find_best_partition_l2,
                     min_l1_potts, min_l2_potts, reconstruct_from_partition_l1,
                     reconstruct_from_partition_l2)

__all__ = [
    "NO_OFFSET", "PottsParams", "StepSignal", "WeightedSignal", "jump_set_distance",
    "l1_distance", "potts_energy_l1", "potts_energy_l2",
    "DeconvBounds", "InfeasibleBounds", "Kernel", "SplitParams", "SplitReport",
    "convolve_same", "deconv_gamma_range", "min_kl1potts_split", "solve_kl1l1",
    "IndexedLinkedHistogram", "enumerate_exact", "naive_dp",
    "Grid", "NoiseSpec", "add_noise", "canonical_step_signal", "make_kernel",
    "MomentTables", "Partition", "find_best_partition_l1", "find_best_partition_l2",
    "min_l1_potts", "min_l2_potts", "reconstruct_from_partition_l1",
    "reconstruct_from_partition_l2",
]
