import math

import numpy as np
import pytest
from scipy import stats

from permubench.perm import Permutation, fixed_point_count
from permubench.rng import (CountDistribution, RandomStream, count_samples, derive_seed,
                            poisson_sample, power_law_cdf, power_law_sample, random_k_subset,
                            random_permutation_uniform, random_transposition, seed_state,
                            splitmix64_mix, subset_shuffle)

MASK = (1 << 64) - 1


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK


class ReferenceXoshiro:
    """Straight transcription of xoshiro256** seeded by SplitMix64."""

    def __init__(self, seed):
        self.s = []
        x = seed & MASK
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & MASK
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
            self.s.append(z ^ (z >> 31))

    def next(self):
        s = self.s
        result = (_rotl((s[1] * 5) & MASK, 7) * 9) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result


@pytest.mark.parametrize("seed", [0, 1, 42, 2 ** 63 + 5])
def test_matches_reference_generator(seed):
    ref = ReferenceXoshiro(seed)
    rng = RandomStream(seed)
    assert [rng.next_u64() for _ in range(50)] == [ref.next() for _ in range(50)]


def test_seed_validation_and_derivation():
    with pytest.raises(ValueError):
        seed_state(-1)
    with pytest.raises(ValueError):
        seed_state(2 ** 64)
    seeds = {derive_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(7, 3) == derive_seed(7, 3)
    assert 0 <= splitmix64_mix(12345) < 2 ** 64


def test_determinism_all_draw_types():
    def trace(seed):
        r = RandomStream(seed)
        out = [r.next_u64(), r.uniform(), r.randbelow(17), poisson_sample(1.0, r),
               power_law_sample(1.5, 50, r), random_transposition(9, r),
               random_k_subset(9, 4, r), random_permutation_uniform(9, r),
               subset_shuffle(Permutation.identity(9), {2, 5, 7}, r)]
        return out

    assert trace(99) == trace(99)
    assert trace(99) != trace(100)


def test_uniform_range_and_randbelow():
    r = RandomStream(3)
    us = [r.uniform() for _ in range(10_000)]
    assert 0.0 <= min(us) and max(us) < 1.0
    vals = [r.randbelow(3) for _ in range(30_000)]
    assert set(vals) == {0, 1, 2}
    with pytest.raises(ValueError):
        r.randbelow(0)


def test_poisson_pmf_and_moments():
    draws = count_samples(CountDistribution.poisson(), 10 ** 6, RandomStream(11))
    N = len(draws)
    for k in range(9):
        p = math.exp(-1) / math.factorial(k)
        se = math.sqrt(p * (1 - p) / N)
        assert abs(np.mean(draws == k) - p) <= 3 * se, k
    assert abs(np.mean(draws.astype(float) ** 2) - 2) <= 0.02
    assert abs(np.mean(draws.astype(float) ** 3) - 5) <= 0.10
    assert CountDistribution.poisson().pmf(0) == pytest.approx(1 / math.e)


def test_count_samples_matches_single_draws():
    cd = CountDistribution.power_law(1.5, 20)
    a = count_samples(cd, 100, RandomStream(5))
    r = RandomStream(5)
    from permubench.rng import count_sample
    assert a.tolist() == [count_sample(cd, r) for _ in range(100)]


def test_power_law_exact_small_case():
    cdf = power_law_cdf(2.0, 3)
    pmf = np.diff(np.concatenate([[0.0], cdf]))
    assert pmf == pytest.approx([36 / 49, 9 / 49, 4 / 49], abs=1e-15)
    cd = CountDistribution.power_law(2.0, 3)
    assert cd.normalizer() == pytest.approx(36 / 49)
    r = RandomStream(1)
    assert {power_law_sample(3.0, 1, r) for _ in range(100)} == {1}


def test_power_law_tv_distance_and_range():
    cd = CountDistribution.power_law(1.5, 100)
    draws = count_samples(cd, 10 ** 6, RandomStream(12))
    assert draws.min() >= 1 and draws.max() <= 100
    emp = np.bincount(draws, minlength=101)[1:] / len(draws)
    exact = np.array([cd.pmf(k) for k in range(1, 101)])
    assert 0.5 * np.abs(emp - exact).sum() < 0.005


def test_power_law_validation():
    with pytest.raises(ValueError):
        CountDistribution.power_law(1.0, 5)
    with pytest.raises(ValueError):
        CountDistribution.power_law(1.5, 0)
    with pytest.raises(ValueError):
        CountDistribution.poisson(0)
    with pytest.raises(ValueError):
        power_law_sample(1.5, 0, RandomStream(0))


@pytest.mark.parametrize("key", ["poisson:1", "poisson:2.5", "powerlaw:1.5:n", "powerlaw:2:40"])
def test_count_key_round_trip(key):
    cd = CountDistribution.parse(key)
    assert cd.key() == key
    assert CountDistribution.from_dict(cd.to_dict()) == cd


def test_transposition_uniformity():
    r = RandomStream(8)
    assert random_transposition(2, r).a == 1
    counts = {}
    N = 10 ** 6
    for _ in range(N):
        t = random_transposition(4, r)
        counts[(t.a, t.b)] = counts.get((t.a, t.b), 0) + 1
    assert len(counts) == 6
    chi2, p = stats.chisquare(list(counts.values()))
    assert p > 0.001
    with pytest.raises(ValueError):
        random_transposition(1, r)


def test_k_subset():
    r = RandomStream(4)
    assert random_k_subset(5, 0, r) == frozenset()
    assert random_k_subset(5, 5, r) == frozenset(range(1, 6))
    N = 200_000
    counts = {}
    for _ in range(N):
        s = random_k_subset(5, 2, r)
        counts[s] = counts.get(s, 0) + 1
    assert len(counts) == 10
    se = math.sqrt(0.1 * 0.9 / N)
    assert all(abs(c / N - 0.1) <= 3 * se for c in counts.values())
    with pytest.raises(ValueError):
        random_k_subset(3, 4, r)


def test_uniform_permutation():
    r = RandomStream(6)
    assert random_permutation_uniform(1, r) == Permutation.identity(1)
    N = 300_000
    counts = {}
    fixed = 0
    for _ in range(N):
        p = random_permutation_uniform(3, r)
        counts[p] = counts.get(p, 0) + 1
    se = math.sqrt((1 / 6) * (5 / 6) / N)
    assert len(counts) == 6 and all(abs(c / N - 1 / 6) <= 3 * se for c in counts.values())
    for _ in range(100_000):
        fixed += fixed_point_count(random_permutation_uniform(12, r))
    assert abs(fixed / 100_000 - 1) <= 0.01


def test_subset_shuffle():
    r = RandomStream(2)
    sigma = Permutation.parse("3,1,2,5,4")
    assert subset_shuffle(sigma, set(), r) == sigma
    assert subset_shuffle(sigma, {4}, r) == sigma
    outcomes = {}
    N = 100_000
    for _ in range(N):
        out = subset_shuffle(Permutation.identity(4), {1, 2}, r)
        outcomes[out] = outcomes.get(out, 0) + 1
    assert set(outcomes) == {Permutation.identity(4), Permutation.parse("2,1,3,4")}
    se = math.sqrt(0.25 / N)
    assert abs(outcomes[Permutation.identity(4)] / N - 0.5) <= 3 * se
    for _ in range(1000):
        out = subset_shuffle(sigma, {1, 3, 5}, r)
        # labels outside the subset keep their positions
        assert [v for v in out.images if v not in (1, 3, 5)] == [2, 4]
        assert [i for i, v in enumerate(out.images) if v in (2, 4)] == [2, 4]
    with pytest.raises(ValueError):
        subset_shuffle(sigma, {0, 1}, r)


def test_full_shuffle_is_uniform():
    r = RandomStream(10)
    base = Permutation.parse("2,3,1")
    N = 120_000
    counts = {}
    for _ in range(N):
        out = subset_shuffle(base, {1, 2, 3}, r)
        counts[out] = counts.get(out, 0) + 1
    se = math.sqrt((1 / 6) * (5 / 6) / N)
    assert len(counts) == 6 and all(abs(c / N - 1 / 6) <= 3 * se for c in counts.values())
