"""Command-line benchmark harness.

Subcommands:
  run        - execute a configured experiment over its seeds
  gen-data   - write a synthetic dataset file from a generator spec
  aggregate  - fold trace CSVs into a median convergence curve
  validate   - run the oracle and invariant self-checks

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datasets
from .errors import ConfigurationError, DatasetFormatError, DomainError, PartialReinitError
from .experiment import run_experiment
from .kernels import backend_name
from .traces import aggregate_traces, load_trace_dir, write_curve_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_VALIDATION = 3


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = run_experiment(
        config, args.out, seed_offset=args.seed_offset, jobs=args.jobs
    )
    print(
        f"ran {len(summary['seeds'])} seeds ({summary['kernel_backend']} kernels); "
        f"median final cost {summary['median_final_cost']:.6g}"
    )
    print(f"traces and summary.json written to {args.out}")
    return EXIT_OK


def _cmd_gen_data(args) -> int:
    if args.spec:
        try:
            with open(args.spec) as fh:
                spec = json.load(fh)
        except OSError as exc:
            print(f"error: cannot read spec: {exc}", file=sys.stderr)
            return EXIT_IO
        except json.JSONDecodeError as exc:
            print(f"error: spec is not valid JSON: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        spec = json.loads(args.inline)
    rng = np.random.default_rng(int(spec.get("seed", args.seed)))
    dataset = datasets.generate_from_spec(spec, rng)
    datasets.write_dataset(args.out, dataset)
    print(f"wrote {spec.get('type')} dataset to {args.out}")
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    traces = load_trace_dir(args.traces)
    curve = aggregate_traces(
        traces,
        axis=args.axis,
        n_points=args.points,
        grid_min=args.grid_min,
        grid_max=args.grid_max,
    )
    write_curve_csv(args.out, curve, axis=args.axis)
    print(f"aggregated {curve.run_count} traces into {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validation import run_validation

    results = run_validation()
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed ({backend_name()} kernels)")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="partial-reinit",
        description="Benchmark harness comparing partial and full reinitialisation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("--config", required=True, help="experiment JSON file")
    p_run.add_argument("--out", required=True, help="output directory for traces")
    p_run.add_argument("--seed-offset", type=int, default=0)
    p_run.add_argument("--jobs", type=int, default=1, help="parallel seed workers")
    p_run.set_defaults(fn=_cmd_run)

    p_gen = sub.add_parser("gen-data", help="generate a synthetic dataset file")
    spec_group = p_gen.add_mutually_exclusive_group(required=True)
    spec_group.add_argument("--spec", help="generator spec JSON file")
    spec_group.add_argument("--inline", help="generator spec as a JSON string")
    p_gen.add_argument("--out", required=True, help="output dataset path")
    p_gen.add_argument("--seed", type=int, default=0, help="seed if the spec has none")
    p_gen.set_defaults(fn=_cmd_gen_data)

    p_agg = sub.add_parser("aggregate", help="aggregate traces into a curve CSV")
    p_agg.add_argument("--traces", required=True, help="directory of trace_*.csv files")
    p_agg.add_argument("--out", required=True, help="output curve CSV")
    p_agg.add_argument("--axis", choices=["evals", "seconds"], default="evals")
    p_agg.add_argument("--points", type=int, default=200)
    p_agg.add_argument("--grid-min", type=float, default=None)
    p_agg.add_argument("--grid-max", type=float, default=None)
    p_agg.set_defaults(fn=_cmd_aggregate)

    p_val = sub.add_parser("validate", help="run the self-check suite")
    p_val.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PartialReinitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
