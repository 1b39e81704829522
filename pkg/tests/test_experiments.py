import json
import math
import warnings

import numpy as np
import pytest

from permubench.benchmarks import BenchmarkSpec
from permubench.engine import run_batch
from permubench.experiments import (COLUMNS, BudgetRule, SweepPlan, cell_seed, cell_stats,
                                    emit_report, fit_exponent, parse_mutation, read_runs_csv,
                                    summary_rows, sweep, verify_lemmas, write_runs_csv)
from permubench.mutation import MutationConfig

SWAP = MutationConfig.swap()


def small_plan(**kw):
    base = dict(benchmark="pjump", m=3, n_values=(5, 6, 7), runs_per_cell=8, master_seed=11,
                mutations=(SWAP, MutationConfig.scramble()), start="a2plus")
    base.update(kw)
    return SweepPlan(**base)


def test_plan_validation():
    with pytest.raises(ValueError):
        small_plan(n_values=(6, 5))
    with pytest.raises(ValueError):
        small_plan(n_values=(5, 5))
    with pytest.raises(ValueError):
        small_plan(runs_per_cell=0)
    with pytest.raises(ValueError):
        small_plan(start="sideways")
    with pytest.raises(ValueError):
        BudgetRule(factor=-1)
    with pytest.raises(ValueError):
        BudgetRule(factor=None, fixed=0)
    with pytest.raises(ValueError):
        BudgetRule(factor=10, fixed=10)


def test_infeasible_budget_fails_before_running(tmp_path):
    plan = small_plan(n_values=(200, 400), m=200, budget=BudgetRule(factor=1e6))
    with pytest.raises(ValueError):
        sweep(plan, tmp_path / "runs.csv")
    assert not (tmp_path / "runs.csv").exists()


def test_empty_sweep(tmp_path):
    result = sweep(small_plan(n_values=()), tmp_path / "runs.csv")
    assert result.cells == {} and result.rows() == []
    paths = emit_report(result, tmp_path / "rep")
    text = (tmp_path / "rep" / "runs.csv").read_text()
    assert text.splitlines()[-1] == ",".join(COLUMNS)
    assert read_runs_csv(tmp_path / "rep" / "runs.csv") == []
    assert all(p.exists() for p in paths)


def test_single_cell_reduces_to_run_batch():
    plan = small_plan(n_values=(6,), mutations=(SWAP,))
    result = sweep(plan)
    (spec, mcfg), summary = next(iter(result.cells.items()))
    ref = run_batch(spec, mcfg, plan.budget.budget(spec, mcfg), plan.runs_per_cell,
                    cell_seed(plan.master_seed, spec, mcfg), "a2plus")
    assert [r.to_dict() for r in summary.records] == [r.to_dict() for r in ref.records]


def test_csv_round_trip_and_determinism(tmp_path):
    plan = small_plan()
    a = sweep(plan, tmp_path / "a.csv", timestamp=False)
    b = sweep(plan, tmp_path / "b.csv", threads=3, timestamp=False)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = read_runs_csv(tmp_path / "a.csv")
    assert rows == a.rows()
    assert rows[0]["start"] == "a2plus" and rows[0]["m"] == 3
    first = (tmp_path / "a.csv").read_text().splitlines()
    assert first[0] == "# master_seed=11" and first[1] == ",".join(COLUMNS)
    # canonical order: cell key, then seed index
    keys = [(r["operator"], r["n"]) for r in rows]
    assert keys == sorted(keys)


def test_timestamp_line(tmp_path):
    sweep(small_plan(n_values=(5,)), tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().startswith("# generated ")


def test_cell_seeds_independent_of_other_cells():
    small = sweep(small_plan(n_values=(6,)))
    big = sweep(small_plan(n_values=(5, 6, 7)))
    key = next(iter(small.cells))
    assert [r.seed for r in small.cells[key].records] == [r.seed for r in big.cells[key].records]


def test_fit_exact_power_law():
    ns = [16, 24, 32, 48, 64]
    f = fit_exponent([(n, 3.7 * n ** 3) for n in ns])
    assert f.exponent == pytest.approx(3.0, abs=1e-9)
    assert max(abs(r) for r in f.residuals) < 1e-9
    g = fit_exponent([(n, 100 * 3.7 * n ** 3) for n in ns])
    assert g.exponent == pytest.approx(f.exponent, abs=1e-12)
    assert g.intercept == pytest.approx(f.intercept + math.log(100))


def test_fit_with_log_factor():
    ns = [16, 32, 64, 128]
    f = fit_exponent([(n, n ** 3 * math.log(n)) for n in ns])
    assert 3.0 < f.exponent < 3.5


def test_fit_needs_three_points_and_floor():
    with pytest.raises(ValueError):
        fit_exponent([(8, 10.0), (16, 20.0)])
    rows = []
    for n, succ in ((8, 10), (16, 10), (32, 9), (64, 10)):
        for i in range(10):
            rows.append({"benchmark": "pham", "m": None, "operator": "swap", "counts": "poisson:1",
                         "n": n, "iterations": n * n + i, "success": i < succ})
    stats = cell_stats(rows)
    f = fit_exponent(stats)
    assert f.excluded == (32,) and f.n_values == (8, 16, 64)
    with pytest.raises(ValueError):
        fit_exponent(stats, floor=1.01)


def test_report_contents(tmp_path):
    result = sweep(small_plan())
    paths = emit_report(result, tmp_path, "csv", timestamp=False)
    names = sorted(p.name for p in paths)
    assert names.count("runs.csv") == 1
    fits = (tmp_path / "fits.csv").read_text().splitlines()
    assert len(fits) == 1 + 2
    plot = [p for p in paths if p.name.startswith("plot_")]
    assert len(plot) == 2
    body = [l for l in plot[0].read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "ln_n ln_mean" and len(body) == 4
    paths = emit_report(result, tmp_path / "j", "json")
    doc = json.loads((tmp_path / "j" / "report.json").read_text())
    assert len(doc["runs"]) == 48 and len(doc["fits"]) == 2 and doc["plan"]["m"] == 3


def test_report_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report([], blocker / "sub")


def test_parse_mutation():
    assert parse_mutation("swap+1").plus_one
    assert parse_mutation("scramble", "powerlaw:1.5").key() == "scramble/powerlaw:1.5:n"
    with pytest.raises(ValueError):
        parse_mutation("scramble", "gauss:1")


def test_plan_from_dict():
    plan = SweepPlan.from_dict({"benchmark": "PJump", "m": 4, "n_values": [8, 10],
                                "mutations": ["swap/poisson:1", {"operator": "scramble",
                                                                 "counts": "powerlaw:1.5"}],
                                "runs_per_cell": 3, "budget": {"fixed": 1000}, "start": "a2plus"})
    assert plan.benchmark == "pjump" and plan.budget.fixed == 1000
    assert [m.key() for m in plan.mutations] == ["swap/poisson:1", "scramble/powerlaw:1.5:n"]
    assert SweepPlan.from_dict(plan.to_dict()) == plan


def test_verify_spl_and_good_pass():
    report = verify_lemmas(["spl", "good"])
    assert report.passed
    assert all(l.status == "PASS" for l in report.lemmas)


def test_verify_skips_with_zero_samples():
    with pytest.warns(UserWarning):
        report = verify_lemmas(["leainc"], sample_budget=0)
    assert report.lemmas[0].status == "SKIP"


def test_verify_unknown_lemma():
    with pytest.raises(ValueError):
        verify_lemmas(["nope"])


def test_verify_monte_carlo_lemmas_small_budget():
    report = verify_lemmas(["leainc", "dec", "scramble"], seed=3, sample_budget=20_000)
    assert report.passed, report.format()
