"""Command line entry points.

Subcommands cover the full workflow: dataset generation, full-label
training, query campaigns, the symmetry report, query-bias tables, and
tidy exports for plotting.  `--check` re-reads the files a run produced
and exits 2 when a published expectation is violated.
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from .data import gen_dataset, write_dataset


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", default="data", help="dataset directory")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seeds", type=int, default=bench.DEFAULT_SEEDS)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (QALLAB_THREADS overrides)")
    p.add_argument("--fast", action="store_true",
                   help=f"run {bench.FAST_SEEDS} seeds instead of --seeds")
    p.add_argument("--check", action="store_true",
                   help="verify results against the published bands; exit 2 on failure")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qallab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a dataset CSV and its manifest")
    p.add_argument("--task", choices=("donut", "ttt"), required=True)
    p.add_argument("--n", type=int, default=bench.DATASET_SIZE)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="data")

    p = sub.add_parser("train-full", help="multi-seed training on the full label budget")
    p.add_argument("--preset", choices=[n for n, pr in bench.PRESETS.items() if pr.full_arms],
                   required=True)
    _add_common(p)

    p = sub.add_parser("run-al", help="multi-seed query campaigns")
    p.add_argument("--preset", choices=[n for n, pr in bench.PRESETS.items() if pr.al_arms],
                   required=True)
    _add_common(p)

    p = sub.add_parser("verify-symmetry", help="label-symmetry commutation report")
    p.add_argument("--out", default="results")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--check", action="store_true")

    p = sub.add_parser("report-bias", help="class composition of queried samples")
    p.add_argument("--campaign-csv", required=True)
    p.add_argument("--data", default="data")
    p.add_argument("--task", choices=("donut", "ttt", "ttt_binary"), required=True)

    p = sub.add_parser("plot-data", help="tidy CSV exports for the plotting package")
    p.add_argument("--kind", choices=("curves", "boundary", "queries", "bias"),
                   required=True)
    p.add_argument("--campaign-csv", help="source campaign CSV (curves/queries/bias)")
    p.add_argument("--data", default="data")
    p.add_argument("--task", choices=("donut", "ttt", "ttt_binary"), default="donut")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", default=None)
    return parser


def _report_checks(preset: str, out_dir) -> int:
    failures = 0
    for name, ok, detail in bench.check_preset(preset, out_dir):
        print(f"[{'PASS' if ok else 'FAIL'}] {preset}/{name}: {detail}")
        failures += 0 if ok else 1
    return failures


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "gen-data":
        seed = args.seed
        if seed is None:
            seed = bench.DONUT_SEED if args.task == "donut" else bench.TTT_SEED
        dataset = gen_dataset(args.task, args.n, seed)
        csv_path, manifest_path = write_dataset(dataset, args.out)
        print(f"wrote {csv_path} and {manifest_path} "
              f"(classes {dataset.class_counts()})")
        return 0

    if args.command in ("train-full", "run-al"):
        seeds = bench.FAST_SEEDS if args.fast else args.seeds
        runner = bench.run_full_label if args.command == "train-full" else bench.run_al_suite
        runner(args.preset, args.data, args.out, seeds=seeds,
               master_seed=args.master_seed, workers=args.workers)
        print(f"wrote {args.preset} results for {seeds} seeds to {args.out}")
        if args.check:
            return 2 if _report_checks(args.preset, args.out) else 0
        return 0

    if args.command == "verify-symmetry":
        rows = bench.run_symmetry_report(args.out, trials=args.trials)
        for row in rows:
            verdict = "equivariant" if row["passed"] else "not equivariant"
            print(f"{row['model']:12s} {row['group']:8s} "
                  f"max deviation {row['max_deviation']:.3e}  {verdict}")
        if args.check:
            return 2 if _report_checks("symmetry_report", args.out) else 0
        return 0

    if args.command == "report-bias":
        dataset, _ = bench.load_task_dataset(args.task, args.data)
        names = bench.class_names_for(args.task)
        rows = bench.load_al_rows(args.campaign_csv)
        table = bench.report_bias(rows, dataset.labels, names)
        print("strategy,%s" % ",".join(names))
        for strategy in sorted(table):
            counts = table[strategy]
            print("%s,%s" % (strategy, ",".join(str(counts[n]) for n in names)))
        return 0

    if args.command == "plot-data":
        if args.kind == "boundary":
            path = bench.export_boundary_grid(args.data, args.out, seed=args.seed)
        elif args.kind == "curves":
            path = bench.export_curves(args.campaign_csv, args.out)
        elif args.kind == "queries":
            path = bench.export_queries(args.campaign_csv, args.data, args.task,
                                        args.out, seed=args.seed, strategy=args.strategy)
        else:
            path = bench.export_bias(args.campaign_csv, args.data, args.task, args.out)
        print(f"wrote {path}")
        return 0

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
