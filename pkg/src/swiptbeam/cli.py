"""Command-line entry points for the experiment harness.

``swiptbeam run`` executes a configured sweep and writes the record CSV
(exit code 0 on a clean sweep, 2 when any record degraded or failed, 1 on a
configuration error); ``swiptbeam aggregate`` reduces a record CSV to
plot-ready per-cell statistics.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import (
    ALGORITHMS,
    BASELINES,
    ExperimentConfig,
    aggregate,
    read_records_csv,
    run_experiment,
    write_aggregate_csv,
    write_records_csv,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swiptbeam",
        description="Monte-Carlo harness for SWIPT beamforming experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a configured sweep")
    run_p.add_argument("--config", required=True, help="JSON experiment config")
    run_p.add_argument("--out", required=True, help="output CSV for run records")
    run_p.add_argument("--seed", type=int, default=None, help="override master seed")
    run_p.add_argument("--realizations", type=int, default=None,
                       help="override realization count")
    run_p.add_argument("--algorithm", choices=ALGORITHMS, default=None)
    run_p.add_argument("--baseline", choices=BASELINES, default=None)
    run_p.add_argument("--workers", type=int, default=1)
    run_p.add_argument("--agg-out", default=None,
                       help="also write aggregates to this CSV")

    agg_p = sub.add_parser("aggregate", help="aggregate a record CSV")
    agg_p.add_argument("--records", required=True)
    agg_p.add_argument("--out", required=True)
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    if args.algorithm is not None:
        overrides["algorithm"] = args.algorithm
    if args.baseline is not None:
        overrides["baseline"] = args.baseline
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "aggregate":
        rows = aggregate(read_records_csv(args.records))
        write_aggregate_csv(rows, args.out)
        return 0

    try:
        cfg = _load_config(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    records = run_experiment(cfg, workers=args.workers)
    write_records_csv(records, args.out, record_timings=cfg.record_timings)
    if args.agg_out:
        write_aggregate_csv(aggregate(records), args.agg_out)
    clean = all(rec.status == "optimal" for rec in records)
    return 0 if clean else 2


if __name__ == "__main__":
    sys.exit(main())
