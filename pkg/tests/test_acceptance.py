"""The thirteen acceptance criteria, at their stated sizes and tolerances.

Each test records PASS/FAIL for the terminal summary.  Seeds are fixed up
front (one master seed, one derived seed per criterion) and never tuned.
"""

import math

import numpy as np
import pytest

from permubench.benchmarks import BenchmarkSpec
from permubench.engine import random_plateau_state, run_batch, run_once
from permubench.experiments import BudgetRule, SweepPlan, fit_exponent, sweep
from permubench.mutation import MutationConfig
from permubench.oracles import (CycleType, cycle_change_probability_estimate, cycle_types,
                                ea_hitting_time_exact, good_distance_bfs,
                                improvement_probability_estimate, mutation_kernel_exact,
                                one_step_jump_probability_exact, plateau_states,
                                same_cycle_probability_bruteforce, same_cycle_probability_exact,
                                scramble_jump_terms, transition_probability_estimate)
from permubench.perm import (Permutation, all_permutations, cycle_decomposition,
                             fixed_point_count)
from permubench.rng import (CountDistribution, RandomStream, count_samples, derive_seed,
                            random_permutation_uniform)

from helpers import bijectivity_failures

MASTER_SEED = 20240601
SWAP = MutationConfig.swap()
SCRAMBLE = MutationConfig.scramble()


def seed_for(criterion: int) -> int:
    return derive_seed(MASTER_SEED, criterion)


def report(msg: str) -> None:
    print(msg)


@pytest.mark.criterion(1, "same-cycle probability exact and within its bound, n <= 7")
def test_c01_same_cycle_probability(criterion):
    checked = 0
    for n in range(2, 8):
        for ct in cycle_types(n):
            p, bound = same_cycle_probability_exact(ct)
            assert p <= bound, ct
            checked += 1
        for sigma in all_permutations(n):
            p, _ = same_cycle_probability_exact(CycleType.of(sigma))
            assert p == same_cycle_probability_bruteforce(sigma), sigma
    report(f"{checked} cycle types checked")


@pytest.mark.criterion(2, "PLeadingOnes improvement probability + 3 SE <= 6/(n-1)^2")
def test_c02_leading_ones_improvement(criterion):
    rng = RandomStream(seed_for(2))
    worst = 0.0
    for n in (5, 10, 20):
        spec = BenchmarkSpec.pleadingones(n)
        bound = 6 / (n - 1) ** 2
        for _ in range(10):
            sigma = random_permutation_uniform(n, rng)
            while sigma.is_identity():
                sigma = random_permutation_uniform(n, rng)
            est = improvement_probability_estimate(spec, sigma, SWAP, 10 ** 6, rng)
            worst = max(worst, est.upper() / bound)
            assert est.upper() <= bound, (n, str(sigma), est)
    report(f"largest (estimate + 3 SE) / bound = {worst:.3f}")


@pytest.mark.criterion(3, "plateau cycle-change probability + 3 SE <= 3(m/(n-1))^2")
def test_c03_cycle_change(criterion):
    rng = RandomStream(seed_for(3))
    worst = 0.0
    for n, m in ((20, 3), (20, 4), (40, 3)):
        bound = 3 * (m / (n - 1)) ** 2
        for _ in range(10):
            sigma = random_plateau_state(n, m, rng)
            est = cycle_change_probability_estimate(sigma, m, SWAP, 10 ** 6, rng)
            worst = max(worst, est.upper() / bound)
            assert est.upper() <= bound, (n, m, str(sigma), est)
    report(f"largest (estimate + 3 SE) / bound = {worst:.3f}")


@pytest.mark.criterion(4, "every plateau state within floor(m/2) swaps of a good one, n <= 7")
def test_c04_good_distance(criterion):
    exceptions = []
    for m in (3, 4, 5):
        for n in range(m, 8):
            for sigma in plateau_states(n, m):
                if good_distance_bfs(sigma, m) > m // 2:
                    exceptions.append((n, m, str(sigma)))
    assert exceptions == []


@pytest.mark.criterion(5, "engine means within 3 SE of exact hitting times (PJump 4/3, PHam 5)")
def test_c05_exact_vs_engine(criterion):
    for i, spec in enumerate((BenchmarkSpec.pjump(4, 3), BenchmarkSpec.pham(5))):
        exact = ea_hitting_time_exact(spec, SWAP)
        summary = run_batch(spec, SWAP, 10 ** 7, 10 ** 4, derive_seed(seed_for(5), i))
        z = (summary.mean_iterations - exact.mean) / summary.standard_error
        report(f"{spec.key()}: exact {exact.mean:.4f}, engine {summary.mean_iterations:.4f} "
               f"+- {summary.standard_error:.4f} (z = {z:+.2f})")
        assert summary.success_rate == 1
        assert abs(z) <= 3


@pytest.mark.criterion(6, "scramble jump probability at n=5, m=3: Monte Carlo vs exact sum")
def test_c06_scramble_jump(criterion):
    n, m = 5, 3
    k, pk, factor = scramble_jump_terms(n, m, SCRAMBLE.counts)[0]
    assert k == 3
    assert pk * float(factor) == pytest.approx(1 / (360 * math.e), rel=1e-14)
    exact = one_step_jump_probability_exact(n, m, SCRAMBLE)
    (p,) = set(exact.values())
    # independent route: the S_n kernel row of every plateau state
    K = mutation_kernel_exact(n, SCRAMBLE)
    ident = Permutation.identity(n)
    for sigma in plateau_states(n, m):
        assert K.prob(sigma, ident) == pytest.approx(p, rel=1e-13)
    rng = RandomStream(seed_for(6))
    sigma = random_plateau_state(n, m, rng)
    est = transition_probability_estimate(sigma, ident, SCRAMBLE, 10 ** 7, rng)
    se = math.sqrt(p * (1 - p) / est.samples)
    report(f"exact {p:.6e}, Monte Carlo {est.value:.6e}, z = {(est.value - p) / se:+.2f}")
    assert abs(est.value - p) <= 3 * se


def _sweep_means(benchmark, n_values, runs, seed, mutations=(SWAP,), m=None, start="uniform",
                 budget=None):
    plan = SweepPlan(benchmark, tuple(n_values), tuple(mutations), runs, seed, m,
                     budget or BudgetRule(factor=50), start)
    return sweep(plan, threads=4)


@pytest.mark.criterion(7, "PLeadingOnes exponent in [2.6, 3.4]")
def test_c07_leading_ones_scaling(criterion):
    result = _sweep_means("pleadingones", (16, 24, 32, 48, 64), 200, seed_for(7))
    stats = result.stats()
    assert all(c.success_rate == 1 for c in stats)
    fit = fit_exponent(stats)
    report(f"exponent {fit.exponent:.3f} +- {fit.standard_error:.3f}")
    assert 2.6 <= fit.exponent <= 3.4


@pytest.mark.criterion(8, "PHam mean/(n^2 ln n) max/min <= 2.5")
def test_c08_pham_scaling(criterion):
    result = _sweep_means("pham", (16, 32, 64, 128), 200, seed_for(8))
    stats = result.stats()
    assert all(c.success_rate == 1 for c in stats)
    ratios = [c.mean_iterations / (c.n ** 2 * math.log(c.n)) for c in stats]
    report("mean/(n^2 ln n): " + ", ".join(f"{r:.3f}" for r in ratios))
    assert max(ratios) / min(ratios) <= 2.5


@pytest.mark.criterion(9, "PJump m=3 from A2Plus: swap exponent, scramble exponent, n=16 ordering")
def test_c09_operator_separation(criterion):
    result = _sweep_means("pjump", (8, 10, 12, 14, 16), 300, seed_for(9),
                          mutations=(SWAP, SCRAMBLE), m=3, start="a2plus")
    stats = result.stats()
    assert all(c.success_rate == 1 for c in stats)
    by_op = {op: [c for c in stats if c.operator == op] for op in ("swap", "scramble")}
    swap_fit = fit_exponent(by_op["swap"])
    scr_fit = fit_exponent(by_op["scramble"])
    swap16 = next(c for c in by_op["swap"] if c.n == 16)
    scr16 = next(c for c in by_op["scramble"] if c.n == 16)
    clauses = {
        "swap exponent in [3.5, 4.5]": 3.5 <= swap_fit.exponent <= 4.5,
        "scramble exponent in [2.5, 3.5]": 2.5 <= scr_fit.exponent <= 3.5,
        "scramble mean < swap mean at n=16": scr16.mean_iterations < swap16.mean_iterations,
    }
    report(f"swap exponent {swap_fit.exponent:.3f} +- {swap_fit.standard_error:.3f}; "
           f"scramble exponent {scr_fit.exponent:.3f} +- {scr_fit.standard_error:.3f}; "
           f"n=16 means swap {swap16.mean_iterations:.0f}, scramble {scr16.mean_iterations:.0f}")
    failed = [k for k, ok in clauses.items() if not ok]
    assert not failed, f"failed clauses: {failed}"


@pytest.mark.criterion(10, "heavy-tailed scramble mean <= Poisson scramble mean / 1.5 (n=12, m=4)")
def test_c10_heavy_tailed_speedup(criterion):
    ht = MutationConfig.heavy_tailed_scramble(1.5)
    result = _sweep_means("pjump", (12,), 300, seed_for(10), mutations=(SCRAMBLE, ht), m=4,
                          start="a2plus")
    stats = {c.counts: c for c in result.stats()}
    pois, heavy = stats["poisson:1"], stats["powerlaw:1.5:n"]
    assert pois.success_rate == 1 and heavy.success_rate == 1
    report(f"Poisson scramble {pois.mean_iterations:.0f}, heavy-tailed {heavy.mean_iterations:.0f}, "
           f"ratio {pois.mean_iterations / heavy.mean_iterations:.2f}")
    assert heavy.mean_iterations <= pois.mean_iterations / 1.5


@pytest.mark.criterion(11, "Poisson(1) and power-law sampler fidelity")
def test_c11_samplers(criterion):
    rng = RandomStream(seed_for(11))
    draws = count_samples(CountDistribution.poisson(1.0), 10 ** 6, rng)
    N = len(draws)
    for k in range(9):
        p = math.exp(-1) / math.factorial(k)
        assert abs(np.mean(draws == k) - p) <= 3 * math.sqrt(p * (1 - p) / N), k
    x = draws.astype(np.float64)
    m2, m3 = np.mean(x ** 2), np.mean(x ** 3)
    report(f"second moment {m2:.4f}, third moment {m3:.4f}")
    assert abs(m2 - 2) <= 0.01 * 2
    assert abs(m3 - 5) <= 0.02 * 5
    cd = CountDistribution.power_law(1.5, 100)
    pl = count_samples(cd, 10 ** 6, rng)
    assert pl.min() >= 1 and pl.max() <= 100
    emp = np.bincount(pl, minlength=101)[1:] / len(pl)
    exact = np.array([cd.pmf(k) for k in range(1, 101)])
    tv = 0.5 * np.abs(emp - exact).sum()
    report(f"power-law TV distance {tv:.5f}")
    assert tv < 0.005


@pytest.mark.criterion(12, "structural invariants: bijectivity, round trip, no n-1 fixed points, elitism")
def test_c12_structural(criterion):
    configs = (SWAP, MutationConfig.swap(plus_one=True), SCRAMBLE,
               MutationConfig.heavy_tailed_scramble())
    for i, mcfg in enumerate(configs):
        for n in (2, 7, 31):
            state = RandomStream(derive_seed(seed_for(12), 10 * i + n)).state
            assert bijectivity_failures(state, n, *mcfg.kernel_args(n), 10 ** 6) == 0
    for n in range(1, 8):
        for sigma in all_permutations(n):
            assert cycle_decomposition(sigma).to_permutation() == sigma
            assert fixed_point_count(sigma) != n - 1
    # every engine run below executes with the per-iteration elitism assertion on
    specs = (BenchmarkSpec.pham(12), BenchmarkSpec.pleadingones(12), BenchmarkSpec.pjump(8, 3),
             BenchmarkSpec.pjump(7, 4))
    runs = 0
    for spec in specs:
        for mcfg in configs:
            for j in range(25):
                rec = run_once(spec, mcfg, 10 ** 6, derive_seed(seed_for(12), 1000 + runs),
                               debug=True)
                assert rec.success
                runs += 1
    report(f"{runs} engine runs with elitism assertions")


@pytest.mark.criterion(13, "same master seed gives byte-identical sweep CSV across thread counts")
def test_c13_determinism(criterion, tmp_path):
    plan = SweepPlan("pjump", (6, 8, 10), (SWAP, SCRAMBLE, MutationConfig.heavy_tailed_scramble()),
                     40, seed_for(13), 3, BudgetRule(factor=50), "a2plus")
    outputs = []
    for i, threads in enumerate((1, 4, 1, 7)):
        path = tmp_path / f"run{i}.csv"
        sweep(plan, path, threads=threads, timestamp=False)
        outputs.append(path.read_bytes())
    assert all(o == outputs[0] for o in outputs)
    plan2 = SweepPlan("pleadingones", (8, 12, 16), (SWAP,), 30, seed_for(13))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    sweep(plan2, a, threads=1, timestamp=False)
    sweep(plan2, b, threads=3, timestamp=False)
    assert a.read_bytes() == b.read_bytes()
