"""Command line entry points: generate, solve, experiment, profile."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .errors import TspBnbError
from .instance import generate, read_tsplib, write_tsplib
from .probability import load_matrix, noisy_oracle_matrix, oracle_matrix
from .solver import MODE_CLASSIC, MODE_GCBB, SolverConfig, solve


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[MODE_CLASSIC, MODE_GCBB], default=MODE_CLASSIC)
    p.add_argument("--time-limit-s", type=float, default=600.0)
    p.add_argument("--tie-eps", type=float, default=None)
    p.add_argument("--prob-file", type=str, default=None,
                   help="probability-matrix file (gcbb mode)")
    p.add_argument("--prob-source", type=str, default=None,
                   help="'oracle', 'noisy:<level>', or a directory of .prob files")
    p.add_argument("--no-fixing", action="store_true", help="disable reduced-cost edge fixing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tspbnb",
                                     description="1-tree branch-and-bound TSP solver")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random unit-square instances as TSPLIB files")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", type=str, default=".")

    s = sub.add_parser("solve", help="solve one instance and print the report")
    s.add_argument("instance", nargs="?", help="TSPLIB file; omit to generate via --n/--seed")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    _add_solver_flags(s)
    s.add_argument("--out", type=str, default=None, help="also write the report as JSON")

    e = sub.add_parser("experiment", help="paired classic-vs-gcbb batch over random instances")
    e.add_argument("--n", type=int, action="append", required=True,
                   help="instance size; repeat for several sizes")
    e.add_argument("--count", type=int, default=10)
    e.add_argument("--seed", type=int, default=0, help="base seed; instance i uses seed+i")
    e.add_argument("--time-limit-s", type=float, default=600.0)
    e.add_argument("--tie-eps", type=float, default=None)
    e.add_argument("--prob-source", type=str, default="oracle")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--no-fixing", action="store_true")
    e.add_argument("--out-dir", type=str, required=True)

    pr = sub.add_parser("profile", help="recompute profile CSVs from saved reports")
    pr.add_argument("--reports", type=str, required=True, help="reports.ndjson path")
    pr.add_argument("--time-limit-s", type=float, default=600.0)
    pr.add_argument("--out-dir", type=str, required=True)
    return parser


def _cmd_generate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        inst = generate(args.n, args.seed + i)
        path = out_dir / f"{inst.name}.tsp"
        write_tsplib(inst, path)
        print(path)
    return 0


def _probability_from_args(args, inst):
    if args.prob_file:
        return load_matrix(args.prob_file)
    source = args.prob_source or "oracle"
    if source == "oracle":
        return oracle_matrix(inst)
    if source.startswith("noisy:"):
        return noisy_oracle_matrix(inst, float(source.split(":", 1)[1]),
                                   seed=(inst.seed or 0) + 1_000_003)
    return load_matrix(Path(source) / f"{inst.n}_{inst.seed}.prob")


def _cmd_solve(args) -> int:
    if args.instance:
        inst = read_tsplib(args.instance)
    elif args.n is not None:
        inst = generate(args.n, args.seed)
    else:
        print("error: give an instance file or --n", file=sys.stderr)
        return 2
    P = _probability_from_args(args, inst) if args.mode == MODE_GCBB else None
    cfg = SolverConfig(mode=args.mode, time_limit=args.time_limit_s, tie_eps=args.tie_eps,
                       fixing=not args.no_fixing, seed=inst.seed)
    report = solve(inst, P, cfg)
    record = report.to_record()
    print(json.dumps(record, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(record) + "\n", encoding="utf-8")
    return 0


def _cmd_experiment(args) -> int:
    spec = bench.ExperimentSpec(sizes=tuple(args.n), count=args.count, seed_base=args.seed,
                                time_limit=args.time_limit_s, tie_eps=args.tie_eps,
                                prob_source=args.prob_source, workers=args.workers,
                                fixing=not args.no_fixing)
    pairs = bench.run_experiment(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bench.write_reports(pairs, out_dir / "reports.ndjson")
    table = bench.aggregate_table(pairs)
    (out_dir / "aggregate.csv").write_text(bench.render_aggregate_csv(table), encoding="utf-8")
    (out_dir / "aggregate.txt").write_text(bench.render_aggregate_text(table), encoding="utf-8")
    (out_dir / "meta.json").write_text(json.dumps(table.meta, indent=2) + "\n", encoding="utf-8")
    for n in spec.sizes:
        bench.write_profile_csvs(pairs, n, out_dir, spec.time_limit)
    print(bench.render_aggregate_text(table))
    print(f"wrote {out_dir}/reports.ndjson, aggregate.csv, profile CSVs")
    return 0


def _cmd_profile(args) -> int:
    pairs = bench.load_reports(args.reports)
    out_dir = Path(args.out_dir)
    for n in sorted({p.n for p in pairs}):
        for path in bench.write_profile_csvs(pairs, n, out_dir, args.time_limit_s):
            print(path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"generate": _cmd_generate, "solve": _cmd_solve,
                "experiment": _cmd_experiment, "profile": _cmd_profile}
    try:
        return handlers[args.command](args)
    except TspBnbError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
