"""Swap and scramble mutation, with Poisson or power-law mutation strength.

The in-place kernels below act on a 0-based word together with its inverse
and are shared by the engine loop, the Monte-Carlo estimators and the
value-returning functions ``swap_mutate`` / ``scramble_mutate``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .perm import Permutation
from .rng import (CountDistribution, RandomStream, draw_count, shuffle_labels_inplace,
                  subset_draw, transposition_draw)

SWAP = 0
SCRAMBLE = 1

DEFAULT_BETA = 1.5


@njit(cache=True, nogil=True)
def transpose_labels(word, inv, a, b):
    """Left-compose the transposition (a b): exchange labels a and b in the word."""
    pa = inv[a]
    pb = inv[b]
    word[pa] = b
    word[pb] = a
    inv[a] = pb
    inv[b] = pa


@njit(cache=True, nogil=True)
def swap_inplace(state, word, inv, k):
    n = word.shape[0]
    for _ in range(k):
        a, b = transposition_draw(state, n)
        transpose_labels(word, inv, a, b)


@njit(cache=True, nogil=True)
def scramble_inplace(state, word, inv, k, mask, buf):
    subset_draw(state, word.shape[0], k, mask, buf)
    shuffle_labels_inplace(state, word, inv, buf, k)


@njit(cache=True, nogil=True)
def draw_strength(state, op, count_kind, lam, cdf, plus_one, n):
    """Number of elementary operations for one mutation; 0 or 1 scrambled labels is a no-op."""
    k = draw_count(state, count_kind, lam, cdf)
    if op == SWAP:
        if plus_one:
            k += 1
        return k
    if k > n:
        k = n
    return k


@njit(cache=True, nogil=True)
def is_noop(op, k):
    if op == SWAP:
        return k == 0
    return k <= 1


@njit(cache=True, nogil=True)
def apply_strength(state, op, k, word, inv, mask, buf):
    if op == SWAP:
        swap_inplace(state, word, inv, k)
    else:
        scramble_inplace(state, word, inv, k, mask, buf)


@dataclass(frozen=True)
class MutationConfig:
    """Operator plus the law of its strength k.

    ``plus_one`` (swap only) applies k+1 transpositions, the original
    Scharnow-Tinnefeld-Wegener variant.
    """

    operator: str = "swap"
    counts: CountDistribution = field(default_factory=CountDistribution.poisson)
    plus_one: bool = False

    def __post_init__(self):
        op = self.operator.lower()
        if op not in ("swap", "scramble"):
            raise ValueError(f"unknown mutation operator {self.operator!r}")
        object.__setattr__(self, "operator", op)
        if self.plus_one and op != "swap":
            raise ValueError("plus_one applies to swap mutation only")

    @classmethod
    def swap(cls, lam: float = 1.0, plus_one: bool = False) -> "MutationConfig":
        return cls("swap", CountDistribution.poisson(lam), plus_one)

    @classmethod
    def scramble(cls, lam: float = 1.0) -> "MutationConfig":
        return cls("scramble", CountDistribution.poisson(lam))

    @classmethod
    def heavy_tailed_scramble(cls, beta: float = DEFAULT_BETA, u: int | None = None) -> "MutationConfig":
        """Scramble with power-law strength on [1..u]; ``u=None`` means u = n."""
        return cls("scramble", CountDistribution.power_law(beta, u))

    @property
    def code(self) -> int:
        return SWAP if self.operator == "swap" else SCRAMBLE

    def operator_key(self) -> str:
        return "swap+1" if self.plus_one else self.operator

    def key(self) -> str:
        return f"{self.operator_key()}/{self.counts.key()}"

    def kernel_args(self, n: int):
        kind, lam, cdf = self.counts.kernel_args(n)
        return self.code, kind, lam, cdf, self.plus_one

    def to_dict(self) -> dict:
        return {"operator": self.operator, "counts": self.counts.to_dict(), "plus_one": self.plus_one}

    @classmethod
    def from_dict(cls, d: dict) -> "MutationConfig":
        counts = d.get("counts", {"kind": "poisson", "lambda": 1.0})
        return cls(d.get("operator", "swap"), CountDistribution.from_dict(counts),
                   bool(d.get("plus_one", False)))


class Scratch:
    """Per-run working buffers for the in-place kernels."""

    def __init__(self, n: int):
        self.mask = np.zeros(n, np.bool_)
        self.buf = np.empty(n, np.int64)


def mutate_arrays(mcfg: MutationConfig, word: np.ndarray, inv: np.ndarray, rng: RandomStream,
                  scratch: Scratch | None = None) -> int:
    """Mutate ``word``/``inv`` in place; returns the drawn strength k (after clamping)."""
    n = word.shape[0]
    op, kind, lam, cdf, plus_one = mcfg.kernel_args(n)
    k = draw_strength(rng.state, op, kind, lam, cdf, plus_one, n)
    if not is_noop(op, k):
        scratch = scratch or Scratch(n)
        apply_strength(rng.state, op, k, word, inv, scratch.mask, scratch.buf)
    return int(k)


def _mutate(sigma: Permutation, mcfg: MutationConfig, rng: RandomStream) -> Permutation:
    word = sigma.to_array()
    inv = np.argsort(word)
    mutate_arrays(mcfg, word, inv, rng)
    return Permutation.from_array(word)


def swap_mutate(sigma: Permutation, counts: CountDistribution, plus_one: bool,
                rng: RandomStream) -> Permutation:
    """Apply k (or k+1) independent uniform transpositions, left-composed in draw order."""
    if sigma.size < 2:
        raise ValueError("swap mutation needs n >= 2")
    return _mutate(sigma, MutationConfig("swap", counts, plus_one), rng)


def scramble_mutate(sigma: Permutation, counts: CountDistribution, rng: RandomStream) -> Permutation:
    """Shuffle a uniformly chosen set of min(k, n) labels; k in {0, 1} returns ``sigma``."""
    return _mutate(sigma, MutationConfig("scramble", counts), rng)


def mutate(sigma: Permutation, mcfg: MutationConfig, rng: RandomStream) -> Permutation:
    if mcfg.operator == "swap":
        return swap_mutate(sigma, mcfg.counts, mcfg.plus_one, rng)
    return scramble_mutate(sigma, mcfg.counts, rng)
