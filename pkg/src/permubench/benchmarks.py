"""Permutation benchmarks obtained by lifting pseudo-Boolean functions.

A permutation is mapped to the bit string marking its fixed points and the
bit-string function is evaluated on that string.  PHam, PLeadingOnes and
PJump have direct implementations; ``lift_pseudo_boolean`` covers the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .perm import Permutation

PHAM = 0
PLEADINGONES = 1
PJUMP = 2
LIFTED = 3

KIND_CODES = {"pham": PHAM, "pleadingones": PLEADINGONES, "pjump": PJUMP, "lifted": LIFTED}
_ALIASES = {"ham": "pham", "onemax": "pham", "plo": "pleadingones", "leadingones": "pleadingones",
            "jump": "pjump"}

BitFunction = Callable[[Sequence[int]], int]


@njit(cache=True, nogil=True)
def count_fixed(word):
    g = 0
    for i in range(word.shape[0]):
        if word[i] == i:
            g += 1
    return g


@njit(cache=True, nogil=True)
def leading_fixed(word):
    n = word.shape[0]
    for i in range(n):
        if word[i] != i:
            return i
    return n


@njit(cache=True, nogil=True)
def jump_value(g, n, m):
    if g <= n - m or g == n:
        return m + g
    return n - g


@njit(cache=True, nogil=True)
def fitness(kind, word, m):
    if kind == PHAM:
        return count_fixed(word)
    if kind == PLEADINGONES:
        return leading_fixed(word)
    return jump_value(count_fixed(word), word.shape[0], m)


@dataclass(frozen=True)
class BenchmarkSpec:
    """Which fitness function to maximise on S_n.

    For ``kind="lifted"`` the optimum is not derivable from ``lifted_fn``;
    set ``identity_is_optimum`` when all-ones is the unique maximiser of the
    bit-string function, or pass an ``optimum`` predicate.
    """

    kind: str
    n: int
    m: int | None = None
    lifted_fn: BitFunction | None = field(default=None, compare=False)
    identity_is_optimum: bool = False
    optimum: Callable[[Permutation], bool] | None = field(default=None, compare=False)
    name: str | None = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in KIND_CODES:
            raise ValueError(f"unknown benchmark kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.n < 1:
            raise ValueError("n must be positive")
        if kind == "pjump":
            if self.m is None or not 3 <= self.m <= self.n:
                raise ValueError(f"PJump needs 3 <= m <= n, got m={self.m}, n={self.n}")
        elif kind != "lifted" and self.m is not None:
            raise ValueError(f"{kind} takes no jump size")
        if kind == "lifted" and self.lifted_fn is None:
            raise ValueError("lifted benchmark needs a bit-string function")

    @classmethod
    def pham(cls, n: int) -> "BenchmarkSpec":
        return cls("pham", n)

    @classmethod
    def pleadingones(cls, n: int) -> "BenchmarkSpec":
        return cls("pleadingones", n)

    @classmethod
    def pjump(cls, n: int, m: int) -> "BenchmarkSpec":
        return cls("pjump", n, m)

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def max_fitness(self) -> int | None:
        if self.kind == "pjump":
            return self.n + self.m
        if self.kind in ("pham", "pleadingones"):
            return self.n
        return None

    def key(self) -> str:
        if self.kind == "pjump":
            return f"pjump:{self.n}:{self.m}"
        if self.kind == "lifted":
            return f"{self.name or 'lifted'}:{self.n}"
        return f"{self.kind}:{self.n}"

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n}
        if self.m is not None:
            d["m"] = self.m
        return d


def parse_benchmark_key(key: str) -> BenchmarkSpec:
    """Inverse of ``BenchmarkSpec.key`` for the built-in kinds."""
    parts = key.split(":")
    if parts[0] == "pjump":
        return BenchmarkSpec.pjump(int(parts[1]), int(parts[2]))
    return BenchmarkSpec(parts[0], int(parts[1]))


def indicator_string(sigma: Permutation) -> tuple[int, ...]:
    return tuple(int(v == i) for i, v in enumerate(sigma.images, start=1))


def _check_size(spec: BenchmarkSpec, sigma: Permutation) -> None:
    if spec.n != sigma.size:
        raise ValueError(f"benchmark size {spec.n} != permutation size {sigma.size}")


def evaluate(spec: BenchmarkSpec, sigma: Permutation) -> int:
    _check_size(spec, sigma)
    if spec.kind == "lifted":
        return spec.lifted_fn(indicator_string(sigma))
    return int(fitness(spec.code, sigma.to_array(), spec.m or 0))


def is_global_optimum(spec: BenchmarkSpec, sigma: Permutation) -> bool:
    _check_size(spec, sigma)
    if spec.kind != "lifted":
        return sigma.is_identity()
    if spec.optimum is not None:
        return bool(spec.optimum(sigma))
    if spec.identity_is_optimum:
        return sigma.is_identity()
    raise ValueError("lifted benchmark has no declared optimum; set identity_is_optimum or optimum")


def lift_pseudo_boolean(f: BitFunction, n: int, *, identity_is_optimum: bool = False,
                        optimum: Callable[[Permutation], bool] | None = None,
                        name: str | None = None) -> BenchmarkSpec:
    """Permutation benchmark ``sigma -> f(indicator_string(sigma))``."""
    return BenchmarkSpec("lifted", n, lifted_fn=f, identity_is_optimum=identity_is_optimum,
                         optimum=optimum, name=name)


# Bit-string reference functions, used with lift_pseudo_boolean.

def onemax(bits: Sequence[int]) -> int:
    return int(sum(bits))


def leading_ones(bits: Sequence[int]) -> int:
    count = 0
    for b in bits:
        if not b:
            break
        count += 1
    return count


def jump(m: int) -> BitFunction:
    def f(bits: Sequence[int]) -> int:
        n = len(bits)
        ones = int(sum(bits))
        if ones <= n - m or ones == n:
            return m + ones
        return n - ones
    f.__name__ = f"jump_{m}"
    return f


def fitness_table(spec: BenchmarkSpec, words: np.ndarray) -> np.ndarray:
    """Fitness of every row of a 0-based word array."""
    if spec.kind == "lifted":
        return np.array([spec.lifted_fn(tuple(int(v == i) for i, v in enumerate(w))) for w in words])
    return np.array([fitness(spec.code, w, spec.m or 0) for w in words], dtype=np.int64)
