"""Exact transition kernels over S_n and EA hitting times for small n.

States are the n! permutations in lexicographic word order (index 0 is the
identity).  Both mutation operators are conjugation invariant, so a kernel is
determined by the law of the left factor pi in ``offspring = pi ∘ parent``;
the dense matrix is filled from that class function.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
from scipy.sparse.csgraph import breadth_first_order
from scipy.sparse.linalg import expm_multiply
from scipy.stats import poisson

from ..benchmarks import BenchmarkSpec, fitness_table, is_global_optimum
from ..mutation import MutationConfig
from ..perm import Permutation, good_cycle_lengths
from ..rng import CountDistribution
from .cycle_types import (CycleType, identity_hit_by_steps, minimal_factorization_count,
                          plateau_cycle_types)

MAX_KERNEL_N = 7
DEFAULT_TAIL = 1e-12


class ResourceLimitError(RuntimeError):
    """Requested exact computation exceeds the state-space guard."""


def _guard(n: int, limit: int = MAX_KERNEL_N) -> None:
    if n > limit:
        raise ResourceLimitError(f"exact computation over S_{n} refused (limit n <= {limit})")
    if n < 1:
        raise ValueError("n must be positive")


@lru_cache(maxsize=8)
def enumerate_states(n: int) -> np.ndarray:
    """All of S_n as 0-based words, lexicographic; read-only."""
    _guard(n)
    states = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    states.setflags(write=False)
    return states


def rank_words(words: np.ndarray) -> np.ndarray:
    """Lexicographic rank (Lehmer code) of each row of a 0-based word array."""
    words = np.atleast_2d(words)
    n = words.shape[1]
    ranks = np.zeros(words.shape[0], dtype=np.int64)
    for i in range(n - 1):
        smaller = (words[:, i + 1:] < words[:, i:i + 1]).sum(axis=1)
        ranks += smaller * math.factorial(n - 1 - i)
    return ranks


@lru_cache(maxsize=8)
def transposition_matrix(n: int) -> sparse.csr_matrix:
    """Single uniform transposition step ``sigma -> tau ∘ sigma`` as a sparse stochastic matrix."""
    states = enumerate_states(n)
    N = len(states)
    pairs = list(itertools.combinations(range(n), 2))
    rows, cols = [], []
    for a, b in pairs:
        moved = states.copy()
        moved[states == a] = b
        moved[states == b] = a
        rows.append(np.arange(N))
        cols.append(rank_words(moved))
    data = np.full(N * len(pairs), 1.0 / len(pairs))
    T = sparse.csr_matrix((data, (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    return T


def strength_weights(counts: CountDistribution, n: int, tail_bound: float,
                     clamp: int | None = None) -> tuple[np.ndarray, float]:
    """pmf of k as an array, plus the probability mass left out.

    Poisson laws are truncated once the remaining tail is below
    ``tail_bound``; with ``clamp`` the mass above ``clamp`` is folded onto
    k = clamp exactly, as scramble mutation does.
    """
    counts = counts.resolve(n)
    if counts.kind == "powerlaw":
        C = counts.normalizer()
        w = np.array([0.0] + [C * k ** (-counts.beta) for k in range(1, counts.u + 1)])
        if clamp is not None and counts.u > clamp:
            w = np.concatenate([w[:clamp], [w[clamp:].sum()]])
        return w, 0.0
    lam = counts.lam
    if clamp is not None:
        w = poisson.pmf(np.arange(clamp), lam)
        return np.append(w, poisson.sf(clamp - 1, lam)), 0.0
    K = 0
    while poisson.sf(K, lam) >= tail_bound:
        K += 1
    return poisson.pmf(np.arange(K + 1), lam), float(poisson.sf(K, lam))


def swap_class_vector(n: int, mcfg: MutationConfig, tail_bound: float = DEFAULT_TAIL):
    """Law of pi = T_k ∘ ... ∘ T_1 over S_n, and the truncated tail mass."""
    T = transposition_matrix(n)
    w, tail = strength_weights(mcfg.counts, n, tail_bound)
    v = np.zeros(T.shape[0])
    v[0] = 1.0
    if mcfg.plus_one:
        v = T.T @ v
    q = np.zeros_like(v)
    for wk in w:
        q += wk * v
        v = T.T @ v
    return q, tail


def scramble_combinatorial_factor(n: int, d: int, k: int) -> Fraction:
    """Pr[a given pi with support size d is realised | k labels scrambled]."""
    if d == 1 or k < d:
        return Fraction(0)
    if k <= 1:
        return Fraction(1) if d == 0 else Fraction(0)
    return Fraction(math.comb(n - d, k - d), math.comb(n, k) * math.factorial(k))


def scramble_support_law(n: int, counts: CountDistribution) -> np.ndarray:
    """``s[d]``: probability that scramble realises one fixed pi whose support has size d."""
    w, _ = strength_weights(counts, n, DEFAULT_TAIL, clamp=n)
    s = np.zeros(n + 1)
    for d in range(n + 1):
        s[d] = math.fsum(float(w[k] * scramble_combinatorial_factor(n, d, k)) for k in range(len(w)))
    return s


@dataclass(frozen=True, eq=False)
class ExactKernel:
    n: int
    states: np.ndarray
    probabilities: np.ndarray
    kind: str
    truncation_error: float = 0.0

    def row_sums(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    def index(self, sigma: Permutation) -> int:
        return int(rank_words(sigma.to_array()[None, :])[0])

    def prob(self, sigma: Permutation, tau: Permutation) -> float:
        return float(self.probabilities[self.index(sigma), self.index(tau)])

    def triplets(self, threshold: float = 0.0):
        """(row, col, probability) for entries above ``threshold``, row-major."""
        rows, cols = np.nonzero(self.probabilities > threshold)
        return list(zip(rows.tolist(), cols.tolist(), self.probabilities[rows, cols].tolist()))

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("row,col,probability\n")
            for r, c, p in self.triplets():
                fh.write(f"{r},{c},{p!r}\n")


def _dense_from_class(states: np.ndarray, class_value) -> np.ndarray:
    N, n = states.shape
    inverses = np.argsort(states, axis=1)
    P = np.empty((N, N))
    for i in range(N):
        # row i: pi_j = sigma_j ∘ sigma_i^{-1}
        P[i] = class_value(states[:, inverses[i]])
    return P


def mutation_kernel_exact(n: int, mcfg: MutationConfig, tail_bound: float = DEFAULT_TAIL) -> ExactKernel:
    _guard(n)
    if not tail_bound > 0:
        raise ValueError("tail_bound must be positive")
    states = enumerate_states(n)
    if mcfg.operator == "swap":
        if n < 2:
            raise ValueError("swap mutation needs n >= 2")
        q, tail = swap_class_vector(n, mcfg, tail_bound)
        P = _dense_from_class(states, lambda pis: q[rank_words(pis)])
        return ExactKernel(n, states, P, "mutation", tail)
    s = scramble_support_law(n, mcfg.counts)
    ident = np.arange(n)
    P = _dense_from_class(states, lambda pis: s[(pis != ident).sum(axis=1)])
    return ExactKernel(n, states, P, "mutation", 0.0)


def single_transposition_kernel(n: int) -> ExactKernel:
    _guard(n)
    return ExactKernel(n, enumerate_states(n), transposition_matrix(n).toarray(), "transposition")


def poisson_expm_discrepancy(n: int, lam: float = 1.0, tail_bound: float = DEFAULT_TAIL) -> float:
    """max |q - exp(lam (T - I)) e_id|: the truncated series against the matrix exponential."""
    q, _ = swap_class_vector(n, MutationConfig.swap(lam), tail_bound)
    T = transposition_matrix(n)
    e0 = np.zeros(T.shape[0])
    e0[0] = 1.0
    A = lam * (T.T - sparse.identity(T.shape[0], format="csr"))
    ref = expm_multiply(A, e0)
    return float(np.abs(q - ref).max())


def _optimum_mask(spec: BenchmarkSpec, states: np.ndarray) -> np.ndarray:
    if spec.kind != "lifted":
        mask = np.zeros(len(states), bool)
        mask[0] = True
        return mask
    return np.array([is_global_optimum(spec, Permutation.from_array(w)) for w in states])


def ea_kernel_exact(spec: BenchmarkSpec, mcfg: MutationConfig,
                    tail_bound: float = DEFAULT_TAIL) -> ExactKernel:
    """One EA iteration: mutation followed by ``>=`` acceptance; optimum states absorb."""
    M = mutation_kernel_exact(spec.n, mcfg, tail_bound)
    fit = fitness_table(spec, M.states)
    accept = fit[None, :] >= fit[:, None]
    K = np.where(accept, M.probabilities, 0.0)
    np.fill_diagonal(K, 0.0)
    K[np.diag_indices_from(K)] = 1.0 - K.sum(axis=1)
    opt = _optimum_mask(spec, M.states)
    K[opt] = 0.0
    K[opt, opt] = 1.0
    return ExactKernel(spec.n, M.states, K, "ea_step", M.truncation_error)


def start_weights(spec: BenchmarkSpec, start, states: np.ndarray) -> np.ndarray:
    """Start distribution over the enumerated states."""
    N, n = states.shape
    if isinstance(start, Permutation):
        w = np.zeros(N)
        w[rank_words(start.to_array()[None, :])[0]] = 1.0
        return w
    if isinstance(start, np.ndarray):
        return start / start.sum()
    policy = start or "uniform"
    if policy == "uniform":
        return np.full(N, 1.0 / N)
    if policy == "identity":
        w = np.zeros(N)
        w[0] = 1.0
        return w
    if policy in ("a2plus", "good"):
        if spec.kind != "pjump":
            raise ValueError(f"start {policy!r} needs a PJump benchmark")
        g = (states == np.arange(n)).sum(axis=1)
        mask = g == n - spec.m
        if policy == "good":
            target = good_cycle_lengths(spec.m)
            mask &= np.array([CycleType.of(Permutation.from_array(w)).lengths == target
                              for w in states])
        return mask / mask.sum()
    raise ValueError(f"unknown start {start!r}")


@dataclass(frozen=True, eq=False)
class HittingTime:
    mean: float
    error_bound: float
    per_state: np.ndarray

    def __float__(self):
        return self.mean


def expected_hitting_times(K: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Expected steps to reach ``target`` from every state; ``inf`` where unreachable."""
    N = K.shape[0]
    h = np.full(N, np.inf)
    h[target] = 0.0
    # states that can reach the target: BFS on the reversed transition graph
    G = sparse.csr_matrix((K > 0).T.astype(np.int8))
    can = np.zeros(N, bool)
    for t in np.flatnonzero(target):
        can[breadth_first_order(G, t, directed=True, return_predecessors=False)] = True
    transient = can & ~target
    idx = np.flatnonzero(transient)
    if len(idx):
        A = np.eye(len(idx)) - K[np.ix_(idx, idx)]
        h[idx] = scipy.linalg.solve(A, np.ones(len(idx)))
    return h


def ea_hitting_time_exact(spec: BenchmarkSpec, mcfg: MutationConfig, start="uniform",
                          tail_bound: float = DEFAULT_TAIL) -> HittingTime:
    """Expected EA iterations until the optimum, averaged over the start distribution."""
    K = ea_kernel_exact(spec, mcfg, tail_bound)
    target = _optimum_mask(spec, K.states)
    h = expected_hitting_times(K.probabilities, target)
    w = start_weights(spec, start, K.states)
    support = w > 0
    mean = math.inf if np.isinf(h[support]).any() else float(w[support] @ h[support])
    finite = h[np.isfinite(h)]
    hmax = float(finite.max()) if len(finite) else 0.0
    # tail mass moved onto the diagonal perturbs each row by at most truncation_error
    err = K.truncation_error * hmax * hmax
    return HittingTime(mean, err, h)


def one_step_jump_probability_exact(n: int, m: int, mcfg: MutationConfig,
                                    tail_bound: float = DEFAULT_TAIL) -> dict[CycleType, float]:
    """Probability that one mutation maps a plateau state of each cycle type to the identity.

    Swap: read off the S_n class vector for n <= 7, otherwise the exact
    transposition walk on cycle types.  Scramble: the closed finite sum,
    which depends on the plateau state only through m.
    """
    if not 3 <= m <= n:
        raise ValueError(f"need 3 <= m <= n, got m={m}, n={n}")
    types = plateau_cycle_types(n, m)
    if mcfg.operator == "scramble":
        value = scramble_jump_probability(n, m, mcfg.counts)
        return {ct: value for ct in types}
    if n <= MAX_KERNEL_N:
        q, _ = swap_class_vector(n, mcfg, tail_bound)
        out = {}
        for ct in types:
            inv = ct.representative().inverse().to_array()
            out[ct] = float(q[rank_words(inv[None, :])[0]])
        return out
    return {ct: swap_jump_probability_lumped(ct, mcfg, tail_bound) for ct in types}


def swap_jump_probability_lumped(ct: CycleType, mcfg: MutationConfig,
                                 tail_bound: float = DEFAULT_TAIL) -> float:
    n = ct.n
    w, _ = strength_weights(mcfg.counts, n, tail_bound)
    shift = 1 if mcfg.plus_one else 0
    hits = identity_hit_by_steps(ct, len(w) - 1 + shift)
    return math.fsum(w[k] * hits[k + shift] for k in range(len(w)))


def scramble_jump_terms(n: int, m: int, counts: CountDistribution) -> list[tuple[int, float, Fraction]]:
    """``(k, Pr[k], combinatorial factor)`` for every k that can complete the jump."""
    w, _ = strength_weights(counts, n, DEFAULT_TAIL, clamp=n)
    return [(k, float(w[k]), scramble_combinatorial_factor(n, m, k)) for k in range(m, len(w))]


def scramble_jump_probability(n: int, m: int, counts: CountDistribution) -> float:
    return math.fsum(p * float(c) for _, p, c in scramble_jump_terms(n, m, counts))


def minimal_sequence_probability(ct: CycleType, mcfg: MutationConfig) -> float:
    """Jump probability restricted to minimal-length transposition sequences (a lower bound)."""
    n = ct.n
    L = sum(k - 1 for k in ct.lengths)
    k = L - (1 if mcfg.plus_one else 0)
    if k < 0:
        return 0.0
    pairs = n * (n - 1) // 2
    return mcfg.counts.resolve(n).pmf(k) * minimal_factorization_count(ct) / pairs ** L
