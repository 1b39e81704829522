"""Exact and Monte-Carlo checks for the EA on permutations."""

from .bfs import MAX_BFS_N, good_distance_bfs, plateau_states
from .cycle_types import (CycleType, cycle_types, identity_hit_by_steps, minimal_factorization_count,
                          partitions, plateau_cycle_types, same_cycle_probability_bruteforce,
                          same_cycle_probability_exact, transposition_step)
from .estimates import (Estimate, cycle_change_probability_estimate,
                        improvement_probability_estimate, transition_probability_estimate)
from .kernels import (DEFAULT_TAIL, MAX_KERNEL_N, ExactKernel, HittingTime, ResourceLimitError,
                      ea_hitting_time_exact, ea_kernel_exact, enumerate_states,
                      expected_hitting_times, minimal_sequence_probability, mutation_kernel_exact,
                      one_step_jump_probability_exact, poisson_expm_discrepancy, rank_words,
                      scramble_jump_probability, scramble_jump_terms, single_transposition_kernel,
                      start_weights, swap_jump_probability_lumped)
