"""The permutation-based (1+1) EA with elitist ``>=`` acceptance.

One iteration is one mutation plus one evaluation; the evaluation of the
initial permutation is not counted.  Built-in benchmarks run in a jitted
loop; lifted benchmarks call back into Python each iteration but consume the
random stream identically, so a lifted OneMax and PHam produce identical
runs from the same seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .benchmarks import PJUMP, BenchmarkSpec, count_fixed, fitness, indicator_string
from .benchmarks import is_global_optimum
from .mutation import MutationConfig, Scratch, apply_strength, draw_strength, is_noop, mutate_arrays
from .perm import REGION_ORDER, Permutation
from .rng import RandomStream, derive_seed, permutation_draw, shuffle_inplace, subset_draw

START_POLICIES = ("uniform", "identity", "a2plus", "good")

_A1, _A2I, _A2P, _A3 = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def region_code(g, n, m):
    if g == n:
        return _A3
    if g == n - m:
        return _A2P
    if g < n - m:
        return _A2I
    return _A1


@njit(cache=True, nogil=True)
def cycle_count(word, seen):
    """Number of cycles including fixed points; ``seen`` is scratch of size n."""
    n = word.shape[0]
    for i in range(n):
        seen[i] = False
    c = 0
    for i in range(n):
        if not seen[i]:
            c += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = word[j]
    return c


@njit(cache=True, nogil=True)
def _run_kernel(state, word, bench, m, op, count_kind, lam, cdf, plus_one, budget, max_fit,
                region_entry, traj_it, traj_fit, debug):
    n = word.shape[0]
    inv = np.empty(n, np.int64)
    for i in range(n):
        inv[word[i]] = i
    parent = word.copy()
    parent_inv = inv
    child = word.copy()
    child_inv = inv.copy()
    mask = np.zeros(n, np.bool_)
    buf = np.empty(n, np.int64)
    seen = np.zeros(n, np.bool_)

    f = fitness(bench, parent, m)
    traj_it[0] = 0
    traj_fit[0] = f
    traj_len = 1
    track = bench == PJUMP
    region = -1
    parent_cycles = -1
    if track:
        region = region_code(count_fixed(parent), n, m)
        region_entry[region] = 0
    cycle_events = 0
    it = 0
    while f < max_fit and it < budget:
        it += 1
        k = draw_strength(state, op, count_kind, lam, cdf, plus_one, n)
        if is_noop(op, k):
            continue
        child[:] = parent
        child_inv[:] = parent_inv
        apply_strength(state, op, k, child, child_inv, mask, buf)
        fc = fitness(bench, child, m)
        if fc < f:
            continue
        if track and region == _A2P:
            if parent_cycles < 0:
                parent_cycles = cycle_count(parent, seen)
            cc = cycle_count(child, seen)
            if cc != parent_cycles:
                cycle_events += 1
            parent_cycles = cc
        else:
            parent_cycles = -1
        parent, child = child, parent
        parent_inv, child_inv = child_inv, parent_inv
        if fc > f:
            traj_it[traj_len] = it
            traj_fit[traj_len] = fc
            traj_len += 1
        f = fc
        if track:
            region = region_code(count_fixed(parent), n, m)
            if region_entry[region] < 0:
                region_entry[region] = it
        if debug:
            if fitness(bench, parent, m) != f or traj_fit[traj_len - 1] != f:
                raise AssertionError("elitism violated: parent fitness out of sync")
    word[:] = parent
    return it, f, traj_len, cycle_events


@njit(cache=True, nogil=True)
def _plateau_start(state, n, m, good):
    """Uniform element of A2Plus, or uniform good local optimum when ``good``."""
    word = np.arange(n)
    labels = np.empty(m, np.int64)
    mask = np.zeros(n, np.bool_)
    subset_draw(state, n, m, mask, labels)
    if good:
        shuffle_inplace(state, labels, m)
        start = 0
        if m % 2 == 1:
            word[labels[0]] = labels[1]
            word[labels[1]] = labels[2]
            word[labels[2]] = labels[0]
            start = 3
        for j in range(start, m, 2):
            word[labels[j]] = labels[j + 1]
            word[labels[j + 1]] = labels[j]
        return word
    images = labels.copy()
    while True:
        shuffle_inplace(state, images, m)
        ok = True
        for j in range(m):
            if images[j] == labels[j]:
                ok = False
                break
        if ok:
            break
    for j in range(m):
        word[labels[j]] = images[j]
    return word


def random_plateau_state(n: int, m: int, rng: RandomStream, good: bool = False) -> Permutation:
    """Uniform element of A2Plus for PJump_{n,m} (uniform good local optimum when ``good``)."""
    BenchmarkSpec.pjump(n, m)
    return Permutation.from_array(_plateau_start(rng.state, n, m, good))


@dataclass
class RunRecord:
    iterations: int
    success: bool
    seed: int
    final_fitness: float
    region_entry_iterations: dict[str, int] = field(default_factory=dict)
    cycle_change_events: int = 0
    trajectory: list[tuple[int, float]] | None = None
    start: str = "uniform"
    final_permutation: Permutation | None = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "iterations": self.iterations,
            "success": self.success,
            "final_fitness": self.final_fitness,
            "region_entry_iterations": dict(self.region_entry_iterations),
            "cycle_change_events": self.cycle_change_events,
            "trajectory": [list(p) for p in self.trajectory] if self.trajectory is not None else None,
            "start": self.start,
            "final_permutation": str(self.final_permutation) if self.final_permutation else None,
        }


@dataclass
class BatchSummary:
    run_count: int
    mean_iterations: float
    standard_error: float
    success_rate: float
    records: list[RunRecord]
    note: str = ""

    @classmethod
    def from_records(cls, records: list[RunRecord]) -> "BatchSummary":
        its = np.array([r.iterations for r in records if r.success], dtype=np.float64)
        rate = len(its) / len(records)
        mean = float(its.mean()) if len(its) else math.nan
        se = float(its.std(ddof=1) / math.sqrt(len(its))) if len(its) > 1 else math.nan
        note = ""
        if rate < 1:
            note = (f"censored: {len(records) - len(its)} of {len(records)} runs hit the budget; "
                    "mean is over successful runs only")
        return cls(len(records), mean, se, rate, records, note)

    def to_dict(self) -> dict:
        return {
            "run_count": self.run_count,
            "mean_iterations": self.mean_iterations,
            "standard_error": self.standard_error,
            "success_rate": self.success_rate,
            "note": self.note,
            "records": [r.to_dict() for r in self.records],
        }


def theoretical_order(spec: BenchmarkSpec, mcfg: MutationConfig) -> float:
    """Leading-order expected runtime without constants, used for budgets."""
    n = spec.n
    climb = n * n * max(math.log(n), 1.0)
    if spec.kind == "pham":
        return climb
    if spec.kind == "pjump":
        m = spec.m
        if mcfg.operator == "swap":
            return float(n) ** (2 * math.ceil(m / 2)) + climb
        jump = math.factorial(m) * math.comb(n, m)
        if mcfg.counts.kind == "poisson":
            return math.factorial(m) * jump + climb
        return m ** mcfg.counts.beta * jump + climb
    return float(n) ** 3


def default_budget(spec: BenchmarkSpec, mcfg: MutationConfig, factor: float = 50.0) -> int:
    if factor <= 0:
        raise ValueError(f"budget factor must be positive, got {factor}")
    return max(100, int(math.ceil(factor * theoretical_order(spec, mcfg))))


def _start_word(spec: BenchmarkSpec, start, rng: RandomStream) -> tuple[np.ndarray, str]:
    if isinstance(start, Permutation):
        if start.size != spec.n:
            raise ValueError(f"start has size {start.size}, benchmark has n={spec.n}")
        return start.to_array(), "explicit"
    policy = start or "uniform"
    if policy == "uniform":
        return permutation_draw(rng.state, spec.n), policy
    if policy == "identity":
        return np.arange(spec.n), policy
    if policy in ("a2plus", "good"):
        if spec.kind != "pjump":
            raise ValueError(f"start policy {policy!r} needs a PJump benchmark")
        return _plateau_start(rng.state, spec.n, spec.m, policy == "good"), policy
    raise ValueError(f"unknown start policy {policy!r}; expected one of {START_POLICIES}")


def _region_dict(entry: np.ndarray) -> dict[str, int]:
    return {REGION_ORDER[i].value: int(entry[i]) for i in range(4) if entry[i] >= 0}


def run_once(spec: BenchmarkSpec, mcfg: MutationConfig, budget: int, seed: int, start=None,
             *, trajectory: bool = True, debug: bool = False) -> RunRecord:
    """One run from ``start`` (a Permutation or a start policy name; default uniform)."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if mcfg.operator == "swap" and spec.n < 2:
        raise ValueError("swap mutation needs n >= 2")
    rng = RandomStream(seed)
    word, start_name = _start_word(spec, start, rng)
    word = np.ascontiguousarray(word, dtype=np.int64)
    if spec.kind == "lifted":
        return _run_python(spec, mcfg, budget, rng, word, start_name, trajectory)

    op, kind, lam, cdf, plus_one = mcfg.kernel_args(spec.n)
    entry = np.full(4, -1, np.int64)
    cap = spec.max_fitness + 2
    traj_it = np.empty(cap, np.int64)
    traj_fit = np.empty(cap, np.int64)
    its, f, tlen, events = _run_kernel(rng.state, word, spec.code, spec.m or 0, op, kind, lam, cdf,
                                       plus_one, int(budget), spec.max_fitness, entry,
                                       traj_it, traj_fit, debug)
    traj = [(int(traj_it[i]), int(traj_fit[i])) for i in range(tlen)] if trajectory else None
    return RunRecord(int(its), int(f) == spec.max_fitness, int(seed), int(f), _region_dict(entry),
                     int(events), traj, start_name, Permutation.from_array(word))


def _run_python(spec, mcfg, budget, rng, word, start_name, want_traj) -> RunRecord:
    is_opt = lambda w: is_global_optimum(spec, Permutation.from_array(w))
    f = spec.lifted_fn(indicator_string(Permutation.from_array(word)))
    traj = [(0, f)]
    inv = np.argsort(word)
    child = word.copy()
    child_inv = inv.copy()
    scratch = Scratch(spec.n)
    done = is_opt(word)
    it = 0
    while not done and it < budget:
        it += 1
        child[:] = word
        child_inv[:] = inv
        k = mutate_arrays(mcfg, child, child_inv, rng, scratch)
        if is_noop(mcfg.code, k):
            continue
        fc = spec.lifted_fn(tuple(int(v == i) for i, v in enumerate(child)))
        if fc < f:
            continue
        word, child = child, word
        inv, child_inv = child_inv, inv
        if fc > f:
            traj.append((it, fc))
        f = fc
        done = is_opt(word)
    return RunRecord(it, bool(done), int(rng.seed), f, {}, 0, traj if want_traj else None,
                     start_name, Permutation.from_array(word))


def run_batch(spec: BenchmarkSpec, mcfg: MutationConfig, budget: int, run_count: int,
              master_seed: int, start_policy=None, *, threads: int = 1,
              trajectory: bool = False, debug: bool = False) -> BatchSummary:
    """``run_count`` independent runs; run i uses ``derive_seed(master_seed, i)``."""
    if run_count < 1:
        raise ValueError("run_count must be >= 1")
    seeds = [derive_seed(master_seed, i) for i in range(run_count)]

    def one(seed):
        return run_once(spec, mcfg, budget, seed, start_policy, trajectory=trajectory, debug=debug)

    if threads <= 1 or run_count == 1:
        records = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, seeds))
    return BatchSummary.from_records(records)

