"""Transposition distance from plateau states to the nearest good local optimum."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from ..perm import Permutation, RegionLabel, classify_region, good_cycle_lengths
from .cycle_types import CycleType
from .kernels import _guard, rank_words

MAX_BFS_N = 8


@lru_cache(maxsize=16)
def _distance_table(n: int, m: int) -> np.ndarray:
    """BFS distance over all of S_n (lexicographic ranks) from the set of good permutations."""
    _guard(n, MAX_BFS_N)
    states = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    N = len(states)
    neighbours = []
    for a, b in itertools.combinations(range(n), 2):
        moved = states.copy()
        moved[states == a] = b
        moved[states == b] = a
        neighbours.append(rank_words(moved))
    nbr = np.stack(neighbours, axis=1)

    target = good_cycle_lengths(m)
    fixed = (states == np.arange(n)).sum(axis=1)
    dist = np.full(N, -1, np.int64)
    for i in np.flatnonzero(fixed == n - m):
        if CycleType.of(Permutation.from_array(states[i])).lengths == target:
            dist[i] = 0
    frontier = np.flatnonzero(dist == 0)
    d = 0
    while len(frontier):
        d += 1
        cand = np.unique(nbr[frontier].ravel())
        cand = cand[dist[cand] < 0]
        dist[cand] = d
        frontier = cand
    dist.setflags(write=False)
    return dist


def good_distance_bfs(sigma: Permutation, m: int) -> int:
    """Fewest transpositions taking ``sigma`` (a PJump local optimum) to a good local optimum."""
    _guard(sigma.size, MAX_BFS_N)
    if classify_region(sigma, m) is not RegionLabel.A2_PLUS:
        raise ValueError(f"{sigma} is not in A2Plus for m={m}")
    table = _distance_table(sigma.size, m)
    return int(table[rank_words(sigma.to_array()[None, :])[0]])


def plateau_states(n: int, m: int):
    """Every element of A2Plus for PJump_{n,m}."""
    _guard(n, MAX_BFS_N)
    for word in itertools.permutations(range(n)):
        if sum(1 for i, v in enumerate(word) if i == v) == n - m:
            yield Permutation.from_array(word)
