"""Monte-Carlo estimators for one-step probabilities of the EA."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..benchmarks import PJUMP, BenchmarkSpec, fitness, indicator_string
from ..engine import cycle_count
from ..mutation import MutationConfig, Scratch, apply_strength, draw_strength, is_noop, mutate_arrays
from ..perm import Permutation, classify_region, RegionLabel
from ..rng import RandomStream


@dataclass(frozen=True)
class Estimate:
    value: float
    standard_error: float
    samples: int
    hits: int

    @classmethod
    def from_hits(cls, hits: int, samples: int) -> "Estimate":
        p = hits / samples
        return cls(p, math.sqrt(p * (1 - p) / samples), samples, hits)

    def upper(self, z: float = 3.0) -> float:
        return self.value + z * self.standard_error

    def within(self, exact: float, z: float = 3.0) -> bool:
        """``|estimate - exact| <= z * SE`` with SE taken from the exact probability."""
        se = math.sqrt(exact * (1 - exact) / self.samples)
        return abs(self.value - exact) <= z * se


@njit(cache=True, nogil=True)
def _improvement_hits(state, word, bench, m, op, kind, lam, cdf, plus_one, samples):
    n = word.shape[0]
    inv = np.empty(n, np.int64)
    for i in range(n):
        inv[word[i]] = i
    f = fitness(bench, word, m)
    child = word.copy()
    child_inv = inv.copy()
    mask = np.zeros(n, np.bool_)
    buf = np.empty(n, np.int64)
    hits = 0
    for _ in range(samples):
        k = draw_strength(state, op, kind, lam, cdf, plus_one, n)
        if is_noop(op, k):
            continue
        child[:] = word
        child_inv[:] = inv
        apply_strength(state, op, k, child, child_inv, mask, buf)
        if fitness(bench, child, m) > f:
            hits += 1
    return hits


@njit(cache=True, nogil=True)
def _cycle_change_hits(state, word, m, op, kind, lam, cdf, plus_one, samples):
    n = word.shape[0]
    inv = np.empty(n, np.int64)
    for i in range(n):
        inv[word[i]] = i
    f = fitness(PJUMP, word, m)
    seen = np.zeros(n, np.bool_)
    cycles = cycle_count(word, seen)
    child = word.copy()
    child_inv = inv.copy()
    mask = np.zeros(n, np.bool_)
    buf = np.empty(n, np.int64)
    hits = 0
    for _ in range(samples):
        k = draw_strength(state, op, kind, lam, cdf, plus_one, n)
        if is_noop(op, k):
            continue
        child[:] = word
        child_inv[:] = inv
        apply_strength(state, op, k, child, child_inv, mask, buf)
        if fitness(PJUMP, child, m) >= f and cycle_count(child, seen) != cycles:
            hits += 1
    return hits


@njit(cache=True, nogil=True)
def _target_hits(state, word, target, op, kind, lam, cdf, plus_one, samples):
    n = word.shape[0]
    inv = np.empty(n, np.int64)
    for i in range(n):
        inv[word[i]] = i
    child = word.copy()
    child_inv = inv.copy()
    mask = np.zeros(n, np.bool_)
    buf = np.empty(n, np.int64)
    same = True
    for i in range(n):
        if word[i] != target[i]:
            same = False
    hits = 0
    for _ in range(samples):
        k = draw_strength(state, op, kind, lam, cdf, plus_one, n)
        if is_noop(op, k):
            if same:
                hits += 1
            continue
        child[:] = word
        child_inv[:] = inv
        apply_strength(state, op, k, child, child_inv, mask, buf)
        eq = True
        for i in range(n):
            if child[i] != target[i]:
                eq = False
                break
        if eq:
            hits += 1
    return hits


def _check_samples(samples: int) -> None:
    if samples < 1:
        raise ValueError("samples must be >= 1")


def improvement_probability_estimate(spec: BenchmarkSpec, sigma: Permutation, mcfg: MutationConfig,
                                     samples: int, rng: RandomStream) -> Estimate:
    """Fraction of mutations of ``sigma`` whose offspring is strictly fitter."""
    _check_samples(samples)
    if spec.n != sigma.size:
        raise ValueError("benchmark and permutation sizes differ")
    word = sigma.to_array()
    if spec.kind == "lifted":
        f = spec.lifted_fn(indicator_string(sigma))
        inv = np.argsort(word)
        scratch = Scratch(spec.n)
        hits = 0
        for _ in range(samples):
            child, child_inv = word.copy(), inv.copy()
            mutate_arrays(mcfg, child, child_inv, rng, scratch)
            if spec.lifted_fn(tuple(int(v == i) for i, v in enumerate(child))) > f:
                hits += 1
        return Estimate.from_hits(hits, samples)
    op, kind, lam, cdf, plus_one = mcfg.kernel_args(spec.n)
    hits = _improvement_hits(rng.state, word, spec.code, spec.m or 0, op, kind, lam, cdf,
                             plus_one, int(samples))
    return Estimate.from_hits(int(hits), samples)


def cycle_change_probability_estimate(sigma: Permutation, m: int, mcfg: MutationConfig,
                                      samples: int, rng: RandomStream) -> Estimate:
    """Fraction of EA iterations on PJump_{n,m} from ``sigma`` whose accepted result changes the cycle count."""
    _check_samples(samples)
    if classify_region(sigma, m) is not RegionLabel.A2_PLUS:
        raise ValueError(f"{sigma} is not a local optimum of PJump with m={m}")
    op, kind, lam, cdf, plus_one = mcfg.kernel_args(sigma.size)
    hits = _cycle_change_hits(rng.state, sigma.to_array(), m, op, kind, lam, cdf, plus_one,
                              int(samples))
    return Estimate.from_hits(int(hits), samples)


def transition_probability_estimate(sigma: Permutation, target: Permutation, mcfg: MutationConfig,
                                    samples: int, rng: RandomStream) -> Estimate:
    """Fraction of mutations of ``sigma`` that produce exactly ``target``."""
    _check_samples(samples)
    op, kind, lam, cdf, plus_one = mcfg.kernel_args(sigma.size)
    hits = _target_hits(rng.state, sigma.to_array(), target.to_array(), op, kind, lam, cdf,
                        plus_one, int(samples))
    return Estimate.from_hits(int(hits), samples)

