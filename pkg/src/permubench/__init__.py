"""The (1+1) EA on permutation benchmarks, with exact and Monte-Carlo oracles."""

from .benchmarks import BenchmarkSpec, evaluate, is_global_optimum, lift_pseudo_boolean
from .engine import BatchSummary, RunRecord, run_batch, run_once
from .mutation import MutationConfig, mutate, scramble_mutate, swap_mutate
from .perm import (CycleDecomposition, Permutation, RegionLabel, Transposition, classify_region,
                   compose, cycle_decomposition, fixed_point_count)
from .rng import CountDistribution, RandomStream

__version__ = "0.1.0"
