"""``permubench`` command line: run, sweep, fit, verify, exact-hitting."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

from . import experiments as ex
from .benchmarks import BenchmarkSpec, parse_benchmark_key
from .engine import START_POLICIES, default_budget, run_batch
from .oracles import ResourceLimitError, ea_hitting_time_exact

log = logging.getLogger("permubench")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_OUT_DIR = "permubench-out"


def _spec(args) -> BenchmarkSpec:
    if args.benchmark == "pjump":
        if args.m is None:
            raise ValueError("PJump needs --m")
        return BenchmarkSpec.pjump(args.n, args.m)
    return parse_benchmark_key(f"{args.benchmark}:{args.n}")


def _add_problem_args(p):
    p.add_argument("--benchmark", required=True, choices=("pham", "pleadingones", "pjump"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--operator", default="swap", choices=("swap", "swap+1", "scramble"))
    p.add_argument("--counts", default="poisson:1",
                   help="poisson:<lambda>, powerlaw:<beta> or powerlaw:<beta>:<u>")


def _cmd_run(args) -> int:
    spec = _spec(args)
    mcfg = ex.parse_mutation(args.operator, args.counts)
    budget = args.budget if args.budget is not None else default_budget(spec, mcfg, args.budget_factor)
    summary = run_batch(spec, mcfg, budget, args.runs, args.seed, args.start, threads=args.threads)
    rows = ex.summary_rows(spec, mcfg, summary)
    paths = ex.emit_report(rows, args.out_dir, args.format, timestamp=not args.no_timestamp,
                           master_seed=args.seed)
    print(f"{spec.key()} {mcfg.key()}: runs={summary.run_count} "
          f"mean={summary.mean_iterations:.6g} se={summary.standard_error:.3g} "
          f"success_rate={summary.success_rate:.4g}")
    if summary.note:
        print(summary.note)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    plan = ex.load_plan(args.config, args.seed)
    out = Path(args.out_dir)
    csv_path = out / "runs.csv" if args.format == "csv" else None

    def progress(spec, mcfg, summary):
        log.info("%s %s mean=%.6g success=%.4g", spec.key(), mcfg.key(), summary.mean_iterations,
                 summary.success_rate)

    result = ex.sweep(plan, csv_path, threads=args.threads, timestamp=not args.no_timestamp,
                      progress=progress)
    paths = ex.emit_report(result, out, args.format, timestamp=not args.no_timestamp,
                           floor=args.floor, write_runs=False)
    for c in result.stats():
        print(f"{ex.group_label(c.group())} n={c.n}: mean={c.mean_iterations:.6g} "
              f"se={c.standard_error:.3g} success_rate={c.success_rate:.4g}")
    if csv_path:
        print(f"wrote {csv_path}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK if result.complete else EXIT_FAIL


def _cmd_fit(args) -> int:
    rows = ex.read_runs_csv(args.input)
    stats_list = ex.cell_stats(rows)
    fits = ex.fit_groups(stats_list, args.floor)
    if not fits:
        print("no group has 3 or more cells above the success-rate floor", file=sys.stderr)
        return EXIT_FAIL
    records = [f.to_dict() for f in fits]
    for f in fits:
        print(f"{f.label}: exponent={f.exponent:.4f} se={f.standard_error:.4f} "
              f"intercept={f.intercept:.4f} points={len(f.n_values)}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        path = out / "fits.json"
        path.write_text(json.dumps(records, indent=2) + "\n")
    else:
        path = out / "fits.csv"
        ex._write_fits_csv(fits, path)
    for f in fits:
        ex.write_plot_data(f, out / f"plot_{ex._safe_name(f.label)}.dat")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = ex.verify_lemmas(args.lemma, args.seed, args.samples)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(report.format())
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_exact(args) -> int:
    spec = _spec(args)
    mcfg = ex.parse_mutation(args.operator, args.counts)
    h = ea_hitting_time_exact(spec, mcfg, args.start)
    value = "inf" if math.isinf(h.mean) else f"{h.mean!r}"
    print(f"{spec.key()} {mcfg.key()} start={args.start}: expected_iterations={value} "
          f"error_bound={h.error_bound:.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    def common(sub: bool) -> argparse.ArgumentParser:
        # subcommand copies default to SUPPRESS so a flag given before the subcommand survives
        d = (lambda v: argparse.SUPPRESS) if sub else (lambda v: v)
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--seed", type=int, default=d(None),
                       help="master seed (default 0, or the sweep config's master_seed)")
        p.add_argument("--threads", type=int, default=d(1))
        p.add_argument("--out-dir", default=d(None), help=f"output directory (default {DEFAULT_OUT_DIR})")
        p.add_argument("--format", choices=("csv", "json"), default=d("csv"))
        p.add_argument("--no-timestamp", action="store_true", default=d(False),
                       help="omit the '# generated' line so outputs are byte-identical")
        p.add_argument("-v", "--verbose", action="store_true", default=d(False))
        return p

    parser = argparse.ArgumentParser(prog="permubench", parents=[common(False)],
                                     description="(1+1) EA experiments on permutation benchmarks")
    subs = parser.add_subparsers(dest="command", required=True)
    shared = common(True)

    p = subs.add_parser("run", parents=[shared], help="independent runs of one configuration")
    _add_problem_args(p)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--budget", type=int, help="iteration cap per run")
    p.add_argument("--budget-factor", type=float, default=50.0,
                   help="cap = factor x leading-order runtime (when --budget is absent)")
    p.add_argument("--start", default="uniform", choices=START_POLICIES)
    p.set_defaults(func=_cmd_run)

    p = subs.add_parser("sweep", parents=[shared], help="run a YAML sweep plan")
    p.add_argument("--config", required=True)
    p.add_argument("--floor", type=float, default=ex.DEFAULT_FLOOR)
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("fit", parents=[shared], help="fit scaling exponents to a runs CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--floor", type=float, default=ex.DEFAULT_FLOOR)
    p.set_defaults(func=_cmd_fit)

    p = subs.add_parser("verify", parents=[shared], help="check the probability lemmas")
    p.add_argument("--lemma", action="append", choices=ex.LEMMAS,
                   help="repeatable; default is all")
    p.add_argument("--samples", type=int, default=1_000_000,
                   help="Monte-Carlo samples per state")
    p.set_defaults(func=_cmd_verify)

    p = subs.add_parser("exact-hitting", parents=[shared], help="exact expected runtime, n <= 7")
    _add_problem_args(p)
    p.add_argument("--start", default="uniform", choices=START_POLICIES)
    p.set_defaults(func=_cmd_exact)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.seed is None and args.command != "sweep":
        args.seed = 0
    if args.out_dir is None and args.command != "verify":
        args.out_dir = DEFAULT_OUT_DIR
    try:
        return args.func(args)
    except (ValueError, ResourceLimitError) as exc:
        print(f"permubench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"permubench: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
