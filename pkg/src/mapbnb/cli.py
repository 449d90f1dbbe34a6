"""Command-line entry point for the experiment harness."""

from __future__ import annotations

import argparse
import json
import sys

from mapbnb.harness import ExperimentConfig, OracleMismatch, run_experiment, run_model_file


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mapbnb",
        description=(
            "Run exact MAP solvers on random complete-graph instances (or a stored "
            "model) and write per-instance and CDF CSVs."
        ),
    )
    p.add_argument("--n", type=int, default=12, help="number of nodes (default 12)")
    p.add_argument(
        "--w",
        type=float,
        action="append",
        help="edge strength; repeat for a sweep (default 0.1 0.2 0.3 2.0)",
    )
    p.add_argument("--trials", type=int, default=100, help="instances per strength")
    p.add_argument("--seed", type=int, default=0, help="base seed for the instance streams")
    p.add_argument("--out-dir", default="results", help="directory for CSV/JSON outputs")
    p.add_argument(
        "--pipeline",
        choices=["bb", "cuts", "svf", "all"],
        default="all",
        help="which solver pipeline(s) to run",
    )
    p.add_argument(
        "--model-file",
        help="run on a stored model file instead of random instances; prints a JSON summary",
    )
    p.add_argument("--max-rounds", type=int, default=1000, help="cutting-plane round limit")
    p.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.model_file:
            row = run_model_file(args.model_file, args.pipeline, args.max_rounds)
            print(json.dumps(row, indent=2, sort_keys=True, default=str))
        else:
            config = ExperimentConfig(
                n=args.n,
                w_values=tuple(args.w) if args.w else (0.1, 0.2, 0.3, 2.0),
                trials=args.trials,
                seed=args.seed,
                out_dir=args.out_dir,
                pipeline=args.pipeline,
                max_rounds=args.max_rounds,
                jobs=args.jobs,
            )
            summary = run_experiment(config)
            print(json.dumps({"files": summary["files"]}, indent=2))
    except OracleMismatch as exc:
        print(f"oracle disagreement: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
