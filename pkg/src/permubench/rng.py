"""Seeded random primitives.

The base generator is xoshiro256** (Blackman & Vigna) seeded through
SplitMix64; both live in this file so draw sequences do not depend on the
numpy or Python release.  Every draw is a jitted function taking the 4-word
state array, which lets the engine kernels and the Python API share one
implementation.

Per-run seeds: run ``i`` of a batch with master seed ``s`` uses
``derive_seed(s, i)``, the (i+1)-th output of SplitMix64 started at ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .perm import Permutation, Transposition

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_U1 = np.uint64(1)
_GAMMA = np.uint64(GOLDEN_GAMMA)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S17 = np.uint64(17)
_S45 = np.uint64(45)
_S7 = np.uint64(7)
_S11 = np.uint64(11)
_M5 = np.uint64(5)
_M9 = np.uint64(9)
_INV53 = 1.0 / 9007199254740992.0

POISSON = 0
POWER_LAW = 1


def splitmix64_mix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of run ``index`` (0-based) under ``master_seed``."""
    return splitmix64_mix((master_seed + (index + 1) * GOLDEN_GAMMA) & MASK64)


def seed_state(seed: int) -> np.ndarray:
    """xoshiro256** state filled by four SplitMix64 outputs of ``seed``."""
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    words = [derive_seed(seed, i) for i in range(4)]
    return np.array(words, dtype=np.uint64)


@njit(cache=True, nogil=True)
def _rotl(x, k):
    return (x << k) | (x >> (np.uint64(64) - k))


@njit(cache=True, nogil=True)
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s1 * _M5, _S7) * _M9
    t = s1 << _S17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _S45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, nogil=True)
def uniform01(state):
    return float(next_u64(state) >> _S11) * _INV53


@njit(cache=True, nogil=True)
def randbelow(state, n):
    """Uniform integer in [0, n) by rejection from the top of the 64-bit range."""
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un
    while True:
        x = next_u64(state)
        if x >= threshold:
            return np.int64(x % un)


@njit(cache=True, nogil=True)
def poisson_draw(state, lam):
    # inversion by sequential search; k is capped where the pmf underflows
    u = uniform01(state)
    p = math.exp(-lam)
    cdf = p
    k = 0
    while u >= cdf and k < 1000:
        k += 1
        p *= lam / k
        cdf += p
        if p == 0.0:
            break
    return k


@njit(cache=True, nogil=True)
def table_draw(state, cdf):
    """Draw from [1..len(cdf)] given cumulative probabilities ``cdf``."""
    u = uniform01(state)
    j = np.searchsorted(cdf, u, side="right")
    if j >= cdf.shape[0]:
        j = cdf.shape[0] - 1
    return j + 1


@njit(cache=True, nogil=True)
def draw_count(state, kind, lam, cdf):
    if kind == POISSON:
        return poisson_draw(state, lam)
    return table_draw(state, cdf)


@njit(cache=True, nogil=True)
def transposition_draw(state, n):
    """Uniform unordered pair of distinct 0-based labels."""
    a = randbelow(state, n)
    b = randbelow(state, n - 1)
    if b >= a:
        b += 1
    return a, b


@njit(cache=True, nogil=True)
def subset_draw(state, n, k, mask, out):
    """Floyd's algorithm: writes a uniform k-subset of [0, n) into ``out[:k]``.

    ``mask`` must be all-False on entry and is all-False again on return.
    """
    c = 0
    for j in range(n - k, n):
        t = randbelow(state, j + 1)
        if mask[t]:
            t = j
        mask[t] = True
        out[c] = t
        c += 1
    for i in range(k):
        mask[out[i]] = False


@njit(cache=True, nogil=True)
def shuffle_inplace(state, arr, k):
    """Fisher-Yates shuffle of ``arr[:k]``."""
    for i in range(k - 1, 0, -1):
        j = randbelow(state, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


@njit(cache=True, nogil=True)
def shuffle_labels_inplace(state, word, inv, labels, k):
    """Replace ``word`` by rho ∘ word for a uniform permutation rho of ``labels[:k]``.

    ``labels`` is shuffled in place; entries of ``word`` holding other labels
    are untouched.  ``inv`` is kept consistent with ``word``.
    """
    pos = np.empty(k, np.int64)
    for j in range(k):
        pos[j] = inv[labels[j]]
    shuffle_inplace(state, labels, k)
    for j in range(k):
        word[pos[j]] = labels[j]
        inv[labels[j]] = pos[j]


@njit(cache=True, nogil=True)
def permutation_draw(state, n):
    word = np.arange(n)
    shuffle_inplace(state, word, n)
    return word


@lru_cache(maxsize=256)
def power_law_cdf(beta: float, u: int) -> np.ndarray:
    """Cumulative table of the power law on [1..u]; cached per ``(beta, u)``."""
    weights = np.arange(1, u + 1, dtype=np.float64) ** (-beta)
    cdf = np.cumsum(weights / weights.sum())
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return cdf


_EMPTY_CDF = np.ones(1, dtype=np.float64)
_EMPTY_CDF.setflags(write=False)


@dataclass(frozen=True)
class CountDistribution:
    """Law of the number of elementary operations per mutation.

    ``poisson(lam)`` or ``power_law(beta, u)``.  A power law with ``u=None``
    takes its range from the problem size when bound via ``resolve``.
    """

    kind: str
    lam: float | None = None
    beta: float | None = None
    u: int | None = None

    def __post_init__(self):
        if self.kind == "poisson":
            if self.lam is None or not self.lam > 0:
                raise ValueError(f"Poisson mean must be positive, got {self.lam}")
            if self.beta is not None or self.u is not None:
                raise ValueError("Poisson counts take only lam")
        elif self.kind == "powerlaw":
            if self.beta is None or not self.beta > 1:
                raise ValueError(f"power-law exponent must exceed 1, got {self.beta}")
            if self.u is not None and self.u < 1:
                raise ValueError(f"power-law range must be >= 1, got {self.u}")
            if self.lam is not None:
                raise ValueError("power-law counts take only beta and u")
        else:
            raise ValueError(f"unknown count distribution {self.kind!r}")

    @classmethod
    def poisson(cls, lam: float = 1.0) -> "CountDistribution":
        return cls("poisson", lam=float(lam))

    @classmethod
    def power_law(cls, beta: float, u: int | None = None) -> "CountDistribution":
        return cls("powerlaw", beta=float(beta), u=u)

    def resolve(self, n: int) -> "CountDistribution":
        if self.kind == "powerlaw" and self.u is None:
            return CountDistribution.power_law(self.beta, n)
        return self

    def normalizer(self) -> float:
        """C_{beta,u} of a power law."""
        if self.kind != "powerlaw" or self.u is None:
            raise ValueError("normalizer needs a power law with a fixed range")
        return 1.0 / math.fsum(k ** (-self.beta) for k in range(1, self.u + 1))

    def pmf(self, k: int) -> float:
        if self.kind == "poisson":
            if k < 0:
                return 0.0
            return math.exp(-self.lam + k * math.log(self.lam) - math.lgamma(k + 1))
        if self.u is None:
            raise ValueError("unresolved power-law range")
        if not 1 <= k <= self.u:
            return 0.0
        return self.normalizer() * k ** (-self.beta)

    def kernel_args(self, n: int | None = None):
        """``(kind_code, lam, cdf)`` triple consumed by the jitted samplers."""
        d = self.resolve(n) if n is not None else self
        if d.kind == "poisson":
            return POISSON, float(d.lam), _EMPTY_CDF
        if d.u is None:
            raise ValueError("power-law range unresolved; pass n")
        return POWER_LAW, 0.0, power_law_cdf(float(d.beta), int(d.u))

    def key(self) -> str:
        if self.kind == "poisson":
            return f"poisson:{self.lam:g}"
        return f"powerlaw:{self.beta:g}:{'n' if self.u is None else self.u}"

    def to_dict(self) -> dict:
        if self.kind == "poisson":
            return {"kind": "poisson", "lambda": self.lam}
        return {"kind": "powerlaw", "beta": self.beta, "u": self.u}

    @classmethod
    def parse(cls, key: str) -> "CountDistribution":
        """Inverse of ``key()``: ``poisson:1``, ``powerlaw:1.5`` or ``powerlaw:1.5:100``."""
        parts = key.strip().lower().split(":")
        try:
            if parts[0] == "poisson" and len(parts) <= 2:
                return cls.poisson(float(parts[1]) if len(parts) == 2 else 1.0)
            if parts[0] == "powerlaw" and 2 <= len(parts) <= 3:
                u = parts[2] if len(parts) == 3 else "n"
                return cls.power_law(float(parts[1]), None if u == "n" else int(u))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad count distribution {key!r}: {exc}") from None
        raise ValueError(f"bad count distribution {key!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "CountDistribution":
        kind = str(d["kind"]).lower().replace("-", "").replace("_", "")
        if kind == "poisson":
            return cls.poisson(d.get("lambda", d.get("lam", 1.0)))
        if kind == "powerlaw":
            u = d.get("u")
            return cls.power_law(d["beta"], None if u in (None, "n") else int(u))
        raise ValueError(f"unknown count distribution {d['kind']!r}")


class RandomStream:
    """Single-owner generator state.  Not safe to share between threads."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.state = seed_state(self.seed)

    def __repr__(self):
        return f"RandomStream(seed={self.seed})"

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def uniform(self) -> float:
        return uniform01(self.state)

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise ValueError("randbelow needs n >= 1")
        return int(randbelow(self.state, n))


def poisson_sample(lam: float, rng: RandomStream) -> int:
    if not lam > 0:
        raise ValueError(f"Poisson mean must be positive, got {lam}")
    return int(poisson_draw(rng.state, float(lam)))


def power_law_sample(beta: float, u: int, rng: RandomStream) -> int:
    if u < 1 or not beta > 1:
        raise ValueError(f"power law needs beta > 1 and u >= 1, got beta={beta}, u={u}")
    return int(table_draw(rng.state, power_law_cdf(float(beta), int(u))))


def count_sample(counts: CountDistribution, rng: RandomStream, n: int | None = None) -> int:
    kind, lam, cdf = counts.kernel_args(n)
    return int(draw_count(rng.state, kind, lam, cdf))


@njit(cache=True, nogil=True)
def _fill_counts(state, kind, lam, cdf, out):
    for i in range(out.shape[0]):
        out[i] = draw_count(state, kind, lam, cdf)


def count_samples(counts: CountDistribution, size: int, rng: RandomStream,
                  n: int | None = None) -> np.ndarray:
    """``size`` consecutive draws, identical to ``size`` calls of ``count_sample``."""
    kind, lam, cdf = counts.kernel_args(n)
    out = np.empty(int(size), np.int64)
    _fill_counts(rng.state, kind, lam, cdf, out)
    return out


def random_transposition(n: int, rng: RandomStream) -> Transposition:
    if n < 2:
        raise ValueError("a transposition needs n >= 2")
    a, b = transposition_draw(rng.state, n)
    return Transposition(int(a) + 1, int(b) + 1)


def random_k_subset(n: int, k: int, rng: RandomStream) -> frozenset[int]:
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    out = np.empty(k, np.int64)
    subset_draw(rng.state, n, k, np.zeros(n, np.bool_), out)
    return frozenset(int(v) + 1 for v in out)


def random_permutation_uniform(n: int, rng: RandomStream) -> Permutation:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Permutation.from_array(permutation_draw(rng.state, n))


def subset_shuffle(sigma: Permutation, positions, rng: RandomStream) -> Permutation:
    """Return rho ∘ sigma for rho uniform over the permutations of the label set ``positions``."""
    labels = sorted(int(v) for v in set(positions))
    if labels and (labels[0] < 1 or labels[-1] > sigma.size):
        raise ValueError(f"labels out of range 1..{sigma.size}: {labels}")
    if len(labels) < 2:
        return sigma
    word = sigma.to_array()
    inv = np.argsort(word)
    lab = np.asarray(labels, dtype=np.int64) - 1
    shuffle_labels_inplace(rng.state, word, inv, lab, len(labels))
    return Permutation.from_array(word)
