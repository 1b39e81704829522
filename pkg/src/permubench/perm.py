"""Permutation values, cycle structure and the PJump region classification.

Permutations are stored in word notation with 1-based labels, so
``Permutation((2, 1, 4, 5, 3))`` is the permutation (12)(345).  Hot loops in
the engine work on 0-based ``numpy`` arrays instead; ``to_array`` and
``Permutation.from_array`` convert between the two.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Permutation:
    """A bijection on [1..n] in word notation: ``images[i-1] == sigma(i)``."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        object.__setattr__(self, "images", images)
        n = len(images)
        if n < 1:
            raise ValueError("a permutation needs at least one element")
        if sorted(images) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {images}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_array(cls, arr) -> "Permutation":
        """Build from a 0-based image array."""
        return cls(tuple(int(v) + 1 for v in arr))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Parse comma-separated word notation such as ``"2,1,4,5,3"``."""
        parts = [p.strip() for p in text.strip().split(",")]
        try:
            labels = [int(p) for p in parts if p]
        except ValueError:
            raise ValueError(f"bad permutation text: {text!r}") from None
        seen = set()
        for v in labels:
            if v in seen:
                raise ValueError(f"duplicate label {v} in {text!r}")
            if not 1 <= v <= len(labels):
                raise ValueError(f"label {v} out of range 1..{len(labels)}")
            seen.add(v)
        return cls(tuple(labels))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], n: int) -> "Permutation":
        word = list(range(1, n + 1))
        touched = set()
        for cyc in cycles:
            for a, b in zip(cyc, tuple(cyc[1:]) + tuple(cyc[:1])):
                if a in touched or not 1 <= a <= n:
                    raise ValueError(f"invalid cycle list {cycles!r}")
                touched.add(a)
                word[a - 1] = b
        return cls(tuple(word))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __len__(self) -> int:
        return len(self.images)

    def __str__(self) -> str:
        return ",".join(map(str, self.images))

    def to_array(self) -> np.ndarray:
        """0-based int64 copy of the word."""
        return np.asarray(self.images, dtype=np.int64) - 1

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, v in enumerate(self.images, start=1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.images, start=1))

    @cached_property
    def cycles(self) -> "CycleDecomposition":
        return cycle_decomposition(self)


@dataclass(frozen=True, order=True)
class Transposition:
    """Unordered pair of distinct labels; stored with ``a < b``."""

    a: int
    b: int

    def __post_init__(self):
        a, b = int(self.a), int(self.b)
        if a == b:
            raise ValueError("a transposition needs two distinct labels")
        if min(a, b) < 1:
            raise ValueError("labels are 1-based")
        object.__setattr__(self, "a", min(a, b))
        object.__setattr__(self, "b", max(a, b))

    def as_permutation(self, n: int) -> Permutation:
        if self.b > n:
            raise ValueError(f"transposition {self} does not fit n={n}")
        word = list(range(1, n + 1))
        word[self.a - 1], word[self.b - 1] = self.b, self.a
        return Permutation(tuple(word))


@dataclass(frozen=True)
class CycleDecomposition:
    """Disjoint non-trivial cycles in canonical form plus the fixed points.

    Each cycle starts at its smallest label and cycles are sorted by that
    label, so two decompositions of the same permutation compare equal.
    """

    n: int
    cycles: tuple[tuple[int, ...], ...]
    fixed_points: frozenset[int]

    @property
    def long_cycle_count(self) -> int:
        return len(self.cycles)

    @property
    def total_cycle_count(self) -> int:
        return len(self.cycles) + len(self.fixed_points)

    @property
    def deranged_count(self) -> int:
        return self.n - len(self.fixed_points)

    @property
    def cycle_lengths(self) -> tuple[int, ...]:
        """Non-trivial cycle lengths in descending order."""
        return tuple(sorted((len(c) for c in self.cycles), reverse=True))

    def to_permutation(self) -> Permutation:
        return Permutation.from_cycles(self.cycles, self.n)

    def __str__(self) -> str:
        if not self.cycles:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles)


class RegionLabel(enum.Enum):
    A1 = "A1"
    A2_INTERIOR = "A2Interior"
    A2_PLUS = "A2Plus"
    A3 = "A3"


REGION_ORDER = (RegionLabel.A1, RegionLabel.A2_INTERIOR, RegionLabel.A2_PLUS, RegionLabel.A3)


def _check_same_size(*perms: Permutation) -> int:
    sizes = {p.size for p in perms}
    if len(sizes) != 1:
        raise ValueError(f"size mismatch: {sorted(sizes)}")
    return sizes.pop()


def compose(outer: Permutation, inner: Permutation) -> Permutation:
    """``outer ∘ inner``, i.e. ``i -> outer(inner(i))``."""
    _check_same_size(outer, inner)
    o = outer.images
    return Permutation(tuple(o[v - 1] for v in inner.images))


def apply_transposition(sigma: Permutation, t: Transposition) -> Permutation:
    """Left-compose ``t`` with ``sigma`` by exchanging the labels ``t.a`` and ``t.b`` in the word."""
    if t.b > sigma.size:
        raise ValueError(f"transposition {t} out of range for n={sigma.size}")
    word = list(sigma.images)
    pa = word.index(t.a)
    pb = word.index(t.b)
    word[pa], word[pb] = t.b, t.a
    return Permutation(tuple(word))


def cycle_decomposition(sigma: Permutation) -> CycleDecomposition:
    n = sigma.size
    seen = [False] * (n + 1)
    cycles = []
    fixed = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = sigma.images[i - 1]
        if len(cyc) == 1:
            fixed.append(start)
        else:
            # start is the smallest unseen label, hence the cycle minimum
            cycles.append(tuple(cyc))
    return CycleDecomposition(n, tuple(cycles), frozenset(fixed))


def fixed_point_count(sigma: Permutation) -> int:
    return sum(1 for i, v in enumerate(sigma.images, start=1) if v == i)


def total_cycle_count(sigma: Permutation) -> int:
    return cycle_decomposition(sigma).total_cycle_count


def min_transpositions_to_identity(sigma: Permutation) -> int:
    return sigma.size - cycle_decomposition(sigma).total_cycle_count


def _check_jump_size(n: int, m: int) -> None:
    if not 3 <= m <= n:
        raise ValueError(f"jump size m={m} must satisfy 3 <= m <= n={n}")


def region_of_fixed_points(g: int, n: int, m: int) -> RegionLabel:
    if g == n:
        return RegionLabel.A3
    if g == n - m:
        return RegionLabel.A2_PLUS
    if g < n - m:
        return RegionLabel.A2_INTERIOR
    return RegionLabel.A1


def classify_region(sigma: Permutation, m: int) -> RegionLabel:
    _check_jump_size(sigma.size, m)
    return region_of_fixed_points(fixed_point_count(sigma), sigma.size, m)


def good_cycle_lengths(m: int) -> tuple[int, ...]:
    """Non-trivial cycle lengths of a good local optimum, descending."""
    if m % 2 == 0:
        return (2,) * (m // 2)
    return (3,) + (2,) * ((m - 3) // 2)


def is_good_local_optimum(sigma: Permutation, m: int) -> bool:
    _check_jump_size(sigma.size, m)
    if fixed_point_count(sigma) != sigma.size - m:
        return False
    return cycle_decomposition(sigma).cycle_lengths == good_cycle_lengths(m)


def all_permutations(n: int) -> Iterator[Permutation]:
    """All of S_n in lexicographic word order."""
    for images in itertools.permutations(range(1, n + 1)):
        yield Permutation(images)
