"""Cycle types, the same-cycle probability, and the transposition walk on cycle types.

Multiplying by a uniform random transposition changes the cycle type of a
permutation in a way that depends only on its current cycle type, so the
walk can be run on integer partitions instead of on S_n.  This gives exact
one-step jump probabilities for swap mutation at sizes where S_n cannot be
enumerated.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from ..perm import Permutation, cycle_decomposition


@dataclass(frozen=True, order=True)
class CycleType:
    """Non-trivial cycle lengths (descending, each >= 2) plus the number of fixed points."""

    lengths: tuple[int, ...]
    fixed: int

    def __post_init__(self):
        lengths = tuple(sorted((int(x) for x in self.lengths), reverse=True))
        if any(x < 2 for x in lengths):
            raise ValueError(f"cycle lengths must be >= 2: {lengths}")
        if self.fixed < 0:
            raise ValueError("negative fixed-point count")
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def of(cls, sigma: Permutation) -> "CycleType":
        d = cycle_decomposition(sigma)
        return cls(d.cycle_lengths, len(d.fixed_points))

    @classmethod
    def from_partition(cls, parts) -> "CycleType":
        parts = list(parts)
        return cls(tuple(p for p in parts if p > 1), sum(1 for p in parts if p == 1))

    @property
    def n(self) -> int:
        return sum(self.lengths) + self.fixed

    @property
    def total_cycles(self) -> int:
        return len(self.lengths) + self.fixed

    @property
    def deranged(self) -> int:
        return sum(self.lengths)

    @property
    def parts(self) -> tuple[int, ...]:
        return self.lengths + (1,) * self.fixed

    def representative(self) -> Permutation:
        """A permutation of this type with consecutive cycles (1 2 ..)(..)."""
        cycles = []
        nxt = 1
        for L in self.lengths:
            cycles.append(tuple(range(nxt, nxt + L)))
            nxt += L
        return Permutation.from_cycles(cycles, self.n)

    def __str__(self) -> str:
        inner = "+".join(map(str, self.lengths)) or "-"
        return f"[{inner}|{self.fixed}]"


def partitions(n: int, max_part: int | None = None, min_part: int = 1) -> Iterator[tuple[int, ...]]:
    """Integer partitions of n in descending order, with parts in [min_part, max_part]."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), min_part - 1, -1):
        for rest in partitions(n - first, first, min_part):
            yield (first,) + rest


def cycle_types(n: int) -> list[CycleType]:
    return [CycleType.from_partition(p) for p in partitions(n)]


def plateau_cycle_types(n: int, m: int) -> list[CycleType]:
    """Cycle types with exactly n - m fixed points (the PJump plateau)."""
    return [CycleType(p, n - m) for p in partitions(m, min_part=2)]


def same_cycle_probability_exact(ct: CycleType) -> tuple[Fraction, Fraction]:
    """Probability that a uniform transposition hits two labels of one cycle, and its upper bound.

    Returns ``(p, bound)`` with p = sum n_i (n_i - 1) / (n (n - 1)) over all
    cycles (fixed points included as 1-cycles) and
    bound = (n - r)(n - r + 1) / (n (n - 1)) for r the total cycle count.
    """
    n = ct.n
    if n < 2:
        raise ValueError("need n >= 2")
    r = ct.total_cycles
    denom = n * (n - 1)
    p = Fraction(sum(L * (L - 1) for L in ct.lengths), denom)
    bound = Fraction((n - r) * (n - r + 1), denom)
    return p, bound


def same_cycle_probability_bruteforce(sigma: Permutation) -> Fraction:
    """Enumerate all transpositions and count those inside one cycle of ``sigma``."""
    n = sigma.size
    owner = {}
    d = cycle_decomposition(sigma)
    for idx, cyc in enumerate(d.cycles):
        for v in cyc:
            owner[v] = idx
    for v in d.fixed_points:
        owner[v] = ("fixed", v)
    hits = sum(1 for a in range(1, n + 1) for b in range(a + 1, n + 1) if owner[a] == owner[b])
    return Fraction(hits, n * (n - 1) // 2)


def transposition_step(parts: tuple[int, ...], n: int) -> dict[tuple[int, ...], Fraction]:
    """Exact one-step law of the cycle type after a uniform random transposition.

    ``parts`` lists all cycle lengths (1s included) in descending order.
    """
    pairs = n * (n - 1) // 2
    c = Counter(parts)
    out: dict[tuple[int, ...], int] = defaultdict(int)

    def replace(remove, add):
        lst = list(parts)
        for x in remove:
            lst.remove(x)
        lst.extend(add)
        return tuple(sorted(lst, reverse=True))

    for L, mult in c.items():
        for d in range(1, L // 2 + 1):
            ways = L if 2 * d != L else L // 2
            out[replace((L,), (d, L - d))] += mult * ways
    keys = sorted(c)
    for i, a in enumerate(keys):
        for b in keys[i:]:
            ways = math.comb(c[a], 2) * a * a if a == b else c[a] * c[b] * a * b
            if ways:
                out[replace((a, b), (a + b,))] += ways
    return {k: Fraction(v, pairs) for k, v in out.items()}


def identity_hit_by_steps(ct: CycleType, max_steps: int) -> list[float]:
    """``h[k]`` = Pr[k uniform transpositions turn a permutation of type ``ct`` into the identity]."""
    n = ct.n
    ident = (1,) * n
    dist: dict[tuple[int, ...], float] = {ct.parts: 1.0}
    hits = []
    cache: dict[tuple[int, ...], list[tuple[tuple[int, ...], float]]] = {}
    for step in range(max_steps + 1):
        hits.append(dist.get(ident, 0.0))
        if step == max_steps:
            break
        remaining = max_steps - step - 1
        nxt: dict[tuple[int, ...], float] = defaultdict(float)
        for parts, p in dist.items():
            if parts not in cache:
                cache[parts] = [(k, float(v)) for k, v in transposition_step(parts, n).items()]
            for new, q in cache[parts]:
                # n - #cycles transpositions are needed to reach the identity
                if n - len(new) <= remaining:
                    nxt[new] += p * q
        dist = nxt
    return hits


def minimal_factorization_count(ct: CycleType) -> int:
    """Number of ordered minimal-length transposition factorizations (Denes' formula)."""
    L = sum(k - 1 for k in ct.lengths)
    count = math.factorial(L)
    for k in ct.lengths:
        count = count * k ** (k - 2) // math.factorial(k - 1)
    return count
