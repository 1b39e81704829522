"""Parameter sweeps, scaling-exponent fits, lemma checks and report files."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import yaml
from scipy import stats

from .benchmarks import BenchmarkSpec
from .engine import BatchSummary, START_POLICIES, default_budget, random_plateau_state, run_batch
from .mutation import MutationConfig
from .oracles import (cycle_change_probability_estimate, cycle_types, good_distance_bfs,
                      improvement_probability_estimate, mutation_kernel_exact,
                      one_step_jump_probability_exact,
                      plateau_states, same_cycle_probability_bruteforce,
                      same_cycle_probability_exact, scramble_jump_terms,
                      transition_probability_estimate)
from .perm import Permutation
from .rng import CountDistribution, RandomStream, derive_seed, random_permutation_uniform

BASE_COLUMNS = ("benchmark", "n", "m", "operator", "counts", "seed", "iterations", "success",
                "final_fitness")
EXTRA_COLUMNS = ("start", "entry_A1", "entry_A2Interior", "entry_A2Plus", "entry_A3",
                 "cycle_change_events")
COLUMNS = BASE_COLUMNS + EXTRA_COLUMNS

DEFAULT_FLOOR = 0.999
LEMMAS = ("spl", "leainc", "dec", "good", "scramble")


def parse_mutation(operator: str, counts: str | None = None) -> MutationConfig:
    """``swap``, ``swap+1`` or ``scramble`` with a count key such as ``powerlaw:1.5``."""
    op = operator.strip().lower()
    plus_one = op == "swap+1"
    if plus_one:
        op = "swap"
    cd = CountDistribution.parse(counts) if counts else CountDistribution.poisson()
    return MutationConfig(op, cd, plus_one)


def _mutation_from_config(item) -> MutationConfig:
    if isinstance(item, str):
        op, _, counts = item.partition("/")
        return parse_mutation(op, counts or None)
    counts = item.get("counts")
    if isinstance(counts, str):
        counts = CountDistribution.parse(counts).to_dict()
    d = dict(item)
    op = str(d.get("operator", "swap")).lower()
    if op == "swap+1":
        d["operator"], d["plus_one"] = "swap", True
    if counts is not None:
        d["counts"] = counts
    return MutationConfig.from_dict(d)


@dataclass(frozen=True)
class BudgetRule:
    """Either ``factor`` times the leading-order runtime, or a ``fixed`` iteration cap."""

    factor: float | None = 50.0
    fixed: int | None = None

    def __post_init__(self):
        if (self.factor is None) == (self.fixed is None):
            raise ValueError("budget rule needs exactly one of factor or fixed")
        if self.fixed is not None and self.fixed < 1:
            raise ValueError(f"fixed budget must be >= 1, got {self.fixed}")
        if self.factor is not None and not (self.factor > 0 and math.isfinite(self.factor)):
            raise ValueError(f"budget factor must be positive and finite, got {self.factor}")

    def budget(self, spec: BenchmarkSpec, mcfg: MutationConfig) -> int:
        if self.fixed is not None:
            return int(self.fixed)
        try:
            b = default_budget(spec, mcfg, self.factor)
        except OverflowError:
            b = 2 ** 63
        if b >= 2 ** 63:
            raise ValueError(f"budget for {spec.key()} overflows a 64-bit counter")
        return b

    def to_dict(self) -> dict:
        return {"fixed": self.fixed} if self.fixed is not None else {"factor": self.factor}

    @classmethod
    def from_config(cls, value) -> "BudgetRule":
        if value is None:
            return cls()
        if isinstance(value, (int, float)):
            return cls(factor=None, fixed=int(value))
        if "fixed" in value:
            return cls(factor=None, fixed=int(value["fixed"]))
        return cls(factor=float(value.get("factor", 50.0)))


@dataclass(frozen=True)
class SweepPlan:
    benchmark: str
    n_values: tuple[int, ...]
    mutations: tuple[MutationConfig, ...]
    runs_per_cell: int
    master_seed: int
    m: int | None = None
    budget: BudgetRule = field(default_factory=BudgetRule)
    start: str = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "mutations", tuple(self.mutations))
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError(f"n_values must be strictly increasing: {self.n_values}")
        if self.runs_per_cell < 1:
            raise ValueError("runs_per_cell must be >= 1")
        if self.start not in START_POLICIES:
            raise ValueError(f"unknown start policy {self.start!r}")
        if self.benchmark not in ("pham", "pleadingones", "pjump"):
            raise ValueError(f"sweeps support pham, pleadingones and pjump, not {self.benchmark!r}")

    def spec(self, n: int) -> BenchmarkSpec:
        if self.benchmark == "pjump":
            return BenchmarkSpec.pjump(n, self.m)
        return getattr(BenchmarkSpec, self.benchmark)(n)

    def cells(self) -> list[tuple[BenchmarkSpec, MutationConfig]]:
        """All cells in canonical order (benchmark, m, mutation key, n)."""
        cells = [(self.spec(n), mc) for mc in self.mutations for n in self.n_values]
        return sorted(cells, key=lambda c: _cell_sort_key(c[0], c[1]))

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "m": self.m,
            "n_values": list(self.n_values),
            "mutations": [mc.to_dict() for mc in self.mutations],
            "runs_per_cell": self.runs_per_cell,
            "budget": self.budget.to_dict(),
            "master_seed": self.master_seed,
            "start": self.start,
        }

    @classmethod
    def from_dict(cls, d: dict, master_seed: int | None = None) -> "SweepPlan":
        muts = d.get("mutations") or [{"operator": "swap"}]
        seed = master_seed if master_seed is not None else int(d.get("master_seed", 0))
        m = d.get("m")
        return cls(str(d["benchmark"]).lower(), tuple(d.get("n_values", ())),
                   tuple(_mutation_from_config(x) for x in muts), int(d.get("runs_per_cell", 1)),
                   seed, None if m is None else int(m), BudgetRule.from_config(d.get("budget")),
                   str(d.get("start", "uniform")))


def load_plan(path, master_seed: int | None = None) -> SweepPlan:
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return SweepPlan.from_dict(data, master_seed)


def _cell_sort_key(spec: BenchmarkSpec, mcfg: MutationConfig):
    return (spec.kind, spec.m or 0, mcfg.operator_key(), mcfg.counts.key(), spec.n)


def cell_seed(master_seed: int, spec: BenchmarkSpec, mcfg: MutationConfig) -> int:
    """Seed of one cell; depends only on the master seed and the cell's own key."""
    label = f"{spec.key()}|{mcfg.key()}".encode()
    tag = int.from_bytes(hashlib.blake2b(label, digest_size=8).digest(), "little")
    return derive_seed(master_seed, tag)


def summary_rows(spec: BenchmarkSpec, mcfg: MutationConfig, summary: BatchSummary) -> list[dict]:
    rows = []
    for r in summary.records:
        entry = r.region_entry_iterations
        rows.append({
            "benchmark": spec.kind,
            "n": spec.n,
            "m": spec.m,
            "operator": mcfg.operator_key(),
            "counts": mcfg.counts.key(),
            "seed": r.seed,
            "iterations": r.iterations,
            "success": bool(r.success),
            "final_fitness": r.final_fitness,
            "start": r.start,
            "entry_A1": entry.get("A1"),
            "entry_A2Interior": entry.get("A2Interior"),
            "entry_A2Plus": entry.get("A2Plus"),
            "entry_A3": entry.get("A3"),
            "cycle_change_events": r.cycle_change_events,
        })
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def _csv_preamble(master_seed, timestamp: bool) -> str:
    lines = []
    if timestamp:
        lines.append(f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
    if master_seed is not None:
        lines.append(f"# master_seed={master_seed}")
    return "".join(line + "\n" for line in lines)


class RunsCsvWriter:
    """Appends run rows to a CSV file and flushes after every batch."""

    def __init__(self, path, master_seed=None, timestamp: bool = True):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", newline="")
        self._fh.write(_csv_preamble(master_seed, timestamp))
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(COLUMNS)
        self._fh.flush()

    def write(self, rows: Iterable[dict]) -> None:
        for row in rows:
            self._writer.writerow([_fmt(row.get(c)) for c in COLUMNS])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_runs_csv(rows: Iterable[dict], path, master_seed=None, timestamp: bool = True) -> Path:
    with RunsCsvWriter(path, master_seed, timestamp) as w:
        w.write(rows)
    return Path(path)


def _parse_number(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def read_runs_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        body = "".join(line for line in fh if not line.startswith("#"))
    rows = []
    for raw in csv.DictReader(io.StringIO(body)):
        missing = [c for c in BASE_COLUMNS if c not in raw]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        row = {}
        for c in COLUMNS:
            v = raw.get(c, "")
            if c in ("benchmark", "operator", "counts", "start"):
                row[c] = v or None
            elif c == "success":
                row[c] = v.strip().lower() in ("1", "true")
            else:
                row[c] = _parse_number(v)
        rows.append(row)
    return rows


@dataclass
class CellStats:
    benchmark: str
    m: int | None
    operator: str
    counts: str
    n: int
    runs: int
    successes: int
    mean_iterations: float
    standard_error: float

    @property
    def success_rate(self) -> float:
        return self.successes / self.runs

    def group(self) -> tuple:
        return (self.benchmark, self.m, self.operator, self.counts)

    def to_dict(self) -> dict:
        return {"benchmark": self.benchmark, "m": self.m, "operator": self.operator,
                "counts": self.counts, "n": self.n, "runs": self.runs,
                "success_rate": self.success_rate, "mean_iterations": self.mean_iterations,
                "standard_error": self.standard_error}


def cell_stats(rows: Iterable[dict]) -> list[CellStats]:
    """Per-cell means over successful runs, in canonical order."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["benchmark"], r["m"], r["operator"], r["counts"], r["n"]), []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1] or 0, k[2], k[3], k[4])):
        rs = groups[key]
        its = np.array([r["iterations"] for r in rs if r["success"]], dtype=np.float64)
        mean = float(its.mean()) if len(its) else math.nan
        se = float(its.std(ddof=1) / math.sqrt(len(its))) if len(its) > 1 else math.nan
        out.append(CellStats(*key, runs=len(rs), successes=len(its), mean_iterations=mean,
                             standard_error=se))
    return out


@dataclass
class SweepResult:
    plan: SweepPlan
    cells: dict[tuple[BenchmarkSpec, MutationConfig], BatchSummary]

    def rows(self) -> list[dict]:
        out = []
        for (spec, mcfg), summary in self.cells.items():
            out.extend(summary_rows(spec, mcfg, summary))
        return out

    def stats(self) -> list[CellStats]:
        return cell_stats(self.rows())

    @property
    def complete(self) -> bool:
        return len(self.cells) == len(self.plan.n_values) * len(self.plan.mutations)


def sweep(plan: SweepPlan, csv_path=None, *, threads: int = 1, timestamp: bool = True,
          progress: Callable[[BenchmarkSpec, MutationConfig, BatchSummary], None] | None = None,
          ) -> SweepResult:
    """Run every cell of ``plan``; rows go to ``csv_path`` as each cell finishes."""
    cells = plan.cells()
    # resolve every budget first so a bad rule fails before any run
    budgets = [plan.budget.budget(spec, mcfg) for spec, mcfg in cells]
    writer = RunsCsvWriter(csv_path, plan.master_seed, timestamp) if csv_path else None
    results: dict = {}
    try:
        for (spec, mcfg), budget in zip(cells, budgets):
            summary = run_batch(spec, mcfg, budget, plan.runs_per_cell,
                                cell_seed(plan.master_seed, spec, mcfg), plan.start, threads=threads)
            results[(spec, mcfg)] = summary
            if writer:
                writer.write(summary_rows(spec, mcfg, summary))
            if progress:
                progress(spec, mcfg, summary)
    finally:
        if writer:
            writer.close()
    return SweepResult(plan, results)


@dataclass(frozen=True)
class FitResult:
    exponent: float
    intercept: float
    standard_error: float
    residuals: tuple[float, ...]
    n_values: tuple[int, ...]
    means: tuple[float, ...]
    excluded: tuple[int, ...] = ()
    label: str = ""

    def predict(self, n: float) -> float:
        return math.exp(self.intercept) * n ** self.exponent

    def to_dict(self) -> dict:
        return {"label": self.label, "exponent": self.exponent, "intercept": self.intercept,
                "standard_error": self.standard_error, "n_values": list(self.n_values),
                "means": list(self.means), "residuals": list(self.residuals),
                "excluded_n": list(self.excluded)}


def fit_exponent(cells: Sequence, floor: float = DEFAULT_FLOOR, label: str = "") -> FitResult:
    """OLS slope of ln(mean iterations) against ln n.

    ``cells`` holds CellStats-like objects (``n``, ``mean_iterations``,
    ``success_rate``) or plain ``(n, mean)`` pairs.  Cells below the
    success-rate floor are excluded, not imputed.
    """
    pts, excluded = [], []
    for c in cells:
        if isinstance(c, tuple):
            n, mean, rate = c[0], c[1], 1.0
        else:
            n, mean, rate = c.n, c.mean_iterations, c.success_rate
        if rate >= floor and mean > 0 and math.isfinite(mean):
            pts.append((int(n), float(mean)))
        else:
            excluded.append(int(n))
    if len(pts) < 3:
        raise ValueError(f"need at least 3 cells above the success floor, got {len(pts)}")
    pts.sort()
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    return FitResult(float(res.slope), float(res.intercept), float(res.stderr),
                     tuple(float(r) for r in resid), tuple(p[0] for p in pts),
                     tuple(p[1] for p in pts), tuple(sorted(excluded)), label)


def group_label(group: tuple) -> str:
    benchmark, m, operator, counts = group
    bench = benchmark if m is None else f"{benchmark}-m{m}"
    return f"{bench}_{operator}_{counts}"


def fit_groups(stats_list: Sequence[CellStats], floor: float = DEFAULT_FLOOR) -> list[FitResult]:
    """One fit per (benchmark, m, operator, counts) group that has enough eligible cells."""
    groups: dict[tuple, list[CellStats]] = {}
    for c in stats_list:
        groups.setdefault(c.group(), []).append(c)
    fits = []
    for g, cs in groups.items():
        try:
            fits.append(fit_exponent(cs, floor, group_label(g)))
        except ValueError:
            continue
    return fits


# ---------------------------------------------------------------- lemma checks


@dataclass
class CheckCase:
    label: str
    value: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.bound - self.value

    def to_dict(self) -> dict:
        return {"label": self.label, "value": self.value, "bound": self.bound,
                "margin": self.margin, "passed": self.passed}


@dataclass
class LemmaResult:
    name: str
    claim: str
    cases: list[CheckCase] = field(default_factory=list)
    skipped: bool = False
    warning: str = ""

    @property
    def passed(self) -> bool:
        return not self.skipped and all(c.passed for c in self.cases)

    @property
    def status(self) -> str:
        return "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")

    def to_dict(self) -> dict:
        return {"name": self.name, "claim": self.claim, "status": self.status,
                "warning": self.warning, "cases": [c.to_dict() for c in self.cases]}


@dataclass
class VerificationReport:
    lemmas: list[LemmaResult]

    @property
    def passed(self) -> bool:
        return all(l.passed or l.skipped for l in self.lemmas)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "lemmas": [l.to_dict() for l in self.lemmas]}

    def format(self) -> str:
        lines = []
        for l in self.lemmas:
            lines.append(f"[{l.status}] {l.name}: {l.claim}")
            if l.warning:
                lines.append(f"    warning: {l.warning}")
            for c in l.cases:
                mark = "ok  " if c.passed else "FAIL"
                lines.append(f"    {mark} {c.label}: value={c.value:.6g} bound={c.bound:.6g} "
                             f"margin={c.margin:.3g}")
        return "\n".join(lines)


def _check_spl(max_n: int = 7) -> LemmaResult:

    res = LemmaResult("spl", "same-cycle probability p = sum n_i(n_i-1)/(n(n-1)) "
                             "and p <= (n-r)(n-r+1)/(n(n-1))")
    for n in range(2, max_n + 1):
        for ct in cycle_types(n):
            p, bound = same_cycle_probability_exact(ct)
            brute = same_cycle_probability_bruteforce(ct.representative())
            res.cases.append(CheckCase(f"n={n} {ct}", float(p), float(bound),
                                       p == brute and p <= bound))
    return res


def _check_leainc(seed: int, samples: int, states: int = 10) -> LemmaResult:

    res = LemmaResult("leainc", "PLeadingOnes improvement probability <= 6/(n-1)^2 "
                                "(estimate + 3 SE)")
    mcfg = MutationConfig.swap()
    for n in (5, 10, 20):
        spec = BenchmarkSpec.pleadingones(n)
        rng = RandomStream(derive_seed(seed, 1000 + n))
        bound = 6 / (n - 1) ** 2
        for i in range(states):
            sigma = random_permutation_uniform(n, rng)
            while sigma.is_identity():
                sigma = random_permutation_uniform(n, rng)
            est = improvement_probability_estimate(spec, sigma, mcfg, samples, rng)
            res.cases.append(CheckCase(f"n={n} sigma={sigma}", est.upper(), bound,
                                       est.upper() <= bound))
    return res


def _check_dec(seed: int, samples: int, states: int = 10) -> LemmaResult:

    res = LemmaResult("dec", "on the PJump plateau, Pr[accepted step changes the cycle count] "
                             "<= 3(m/(n-1))^2 (estimate + 3 SE)")
    mcfg = MutationConfig.swap()
    for n, m in ((20, 3), (20, 4), (40, 3)):
        rng = RandomStream(derive_seed(seed, 2000 + 100 * n + m))
        bound = 3 * (m / (n - 1)) ** 2
        for i in range(states):
            sigma = random_plateau_state(n, m, rng)
            est = cycle_change_probability_estimate(sigma, m, mcfg, samples, rng)
            res.cases.append(CheckCase(f"n={n} m={m} sigma={sigma}", est.upper(), bound,
                                       est.upper() <= bound))
    return res


def _check_good(max_n: int = 7) -> LemmaResult:

    res = LemmaResult("good", "every plateau state is within floor(m/2) transpositions "
                              "of a good local optimum")
    for m in (3, 4, 5):
        for n in range(m, max_n + 1):
            worst = max(good_distance_bfs(s, m) for s in plateau_states(n, m))
            res.cases.append(CheckCase(f"n={n} m={m} max distance", worst, m // 2, worst <= m // 2))
    return res


def _check_scramble(seed: int, samples: int) -> LemmaResult:

    res = LemmaResult("scramble", "scramble jump probability from the plateau is the same for "
                                  "every cycle type; k=m term = 1/(e m!) / C(n,m) / m!")
    n, m = 5, 3
    mcfg = MutationConfig.scramble()
    # the S_n kernel is built without reference to cycle types, so this is a real check
    for nn in (5, 6):
        K = mutation_kernel_exact(nn, mcfg)
        ident = Permutation.identity(nn)
        for mm in range(3, nn + 1):
            closed = next(iter(one_step_jump_probability_exact(nn, mm, mcfg).values()))
            vals = [K.prob(s, ident) for s in plateau_states(nn, mm)]
            dev = max(abs(v - closed) for v in vals)
            res.cases.append(CheckCase(f"n={nn} m={mm} kernel vs closed sum, all plateau states",
                                       dev, 1e-15, dev <= 1e-15))
    k, pk, factor = scramble_jump_terms(n, m, mcfg.counts)[0]
    term = pk * float(factor)
    expected = 1 / (math.e * math.factorial(m)) / math.comb(n, m) / math.factorial(m)
    res.cases.append(CheckCase(f"n={n} m={m} k={k} term vs 1/(360e)", abs(term - expected),
                               1e-15, abs(term - expected) <= 1e-15 and factor == Fraction(1, 60)))
    exact = one_step_jump_probability_exact(n, m, mcfg)
    rng = RandomStream(derive_seed(seed, 3000))
    for ct, p in exact.items():
        sigma = random_plateau_state(n, m, rng)
        est = transition_probability_estimate(sigma, Permutation.identity(n), mcfg, samples, rng)
        z = abs(est.value - p) / math.sqrt(p * (1 - p) / samples)
        res.cases.append(CheckCase(f"n={n} m={m} Monte Carlo |z| (exact {p:.6g})", z, 3.0, z <= 3.0))
    return res


def verify_lemmas(selection: Iterable[str] | None = None, seed: int = 0,
                  sample_budget: int = 1_000_000) -> VerificationReport:
    """Run the selected checks; Monte-Carlo checks use ``sample_budget`` samples per state."""
    names = list(selection) if selection else list(LEMMAS)
    unknown = [x for x in names if x not in LEMMAS]
    if unknown:
        raise ValueError(f"unknown lemma(s) {unknown}; choose from {LEMMAS}")
    out = []
    for name in names:
        if name in ("leainc", "dec", "scramble") and sample_budget < 1:
            msg = f"sample budget {sample_budget} < 1; {name} skipped"
            warnings.warn(msg, UserWarning, stacklevel=2)
            out.append(LemmaResult(name, "Monte-Carlo check", skipped=True, warning=msg))
            continue
        if name == "spl":
            out.append(_check_spl())
        elif name == "leainc":
            out.append(_check_leainc(seed, sample_budget))
        elif name == "dec":
            out.append(_check_dec(seed, sample_budget))
        elif name == "good":
            out.append(_check_good())
        else:
            out.append(_check_scramble(seed, sample_budget))
    return VerificationReport(out)


# ---------------------------------------------------------------- reports


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.+-]+", "-", label)


def _write_cells_csv(stats_list: Sequence[CellStats], path: Path) -> None:
    cols = ("benchmark", "m", "operator", "counts", "n", "runs", "success_rate",
            "mean_iterations", "standard_error")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for c in stats_list:
            d = c.to_dict()
            w.writerow([_fmt(d[k]) for k in cols])


def _write_fits_csv(fits: Sequence[FitResult], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("label", "exponent", "intercept", "standard_error", "points", "excluded_n"))
        for f in fits:
            w.writerow((f.label, repr(f.exponent), repr(f.intercept), repr(f.standard_error),
                        len(f.n_values), " ".join(map(str, f.excluded))))


def write_plot_data(fit: FitResult, path: Path) -> Path:
    """Two-column ln n / ln mean points; the fitted line is recorded in the comment header."""
    with open(path, "w") as fh:
        fh.write(f"# fit {fit.label}: ln(mean) = {fit.intercept!r} + {fit.exponent!r} * ln(n)\n")
        fh.write(f"# slope_se {fit.standard_error!r}\n")
        fh.write("ln_n ln_mean\n")
        for n, mean in zip(fit.n_values, fit.means):
            fh.write(f"{math.log(n)!r} {math.log(mean)!r}\n")
    return path


def emit_report(result: SweepResult | Sequence[dict] | None, out_dir, fmt: str = "csv", *,
                timestamp: bool = True, floor: float = DEFAULT_FLOOR, write_runs: bool = True,
                master_seed: int | None = None) -> list[Path]:
    """Write run tables, per-cell statistics, fitted lines and plot data under ``out_dir``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(result, SweepResult):
        rows = result.rows()
        master_seed = result.plan.master_seed if master_seed is None else master_seed
    else:
        rows = list(result or [])
    stats_list = cell_stats(rows)
    fits = fit_groups(stats_list, floor)
    paths = []
    if fmt == "csv":
        if write_runs:
            paths.append(write_runs_csv(rows, out / "runs.csv", master_seed, timestamp))
        _write_cells_csv(stats_list, out / "cells.csv")
        _write_fits_csv(fits, out / "fits.csv")
        paths += [out / "cells.csv", out / "fits.csv"]
    else:
        doc = {"master_seed": master_seed, "runs": rows,
               "cells": [c.to_dict() for c in stats_list], "fits": [f.to_dict() for f in fits]}
        if isinstance(result, SweepResult):
            doc["plan"] = result.plan.to_dict()
        if timestamp:
            doc["generated"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        path = out / "report.json"
        path.write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")
        paths.append(path)
    for f in fits:
        paths.append(write_plot_data(f, out / f"plot_{_safe_name(f.label)}.dat"))
    return paths
