"""Command-line interface: score, aggregate, summary, and bench subcommands."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import IO, Callable

from .bench import run_bench, write_bench_csv, write_bench_json
from .config import (
    DEFAULT_GRID_SIZE,
    DEFAULT_LASOMO_CAP,
    DEFAULT_MIN_LOG_SCORE,
    WORKERS_ENV_VAR,
    EnsembleSpec,
    RunConfig,
)
from .data_model import parse_forecast_table, parse_oracle_table
from .errors import EnsembleImportanceError
from .importance import (
    model_importance,
    read_importance_table,
    write_importance_csv,
    write_importance_json,
)
from .summarize import (
    aggregate,
    format_aggregate_text,
    format_summary_text,
    summarize,
    summary_to_dict,
    write_aggregate_csv,
    write_aggregate_json,
)

ENSEMBLE_CHOICES = ("simple_mean", "simple_median", "linear_pool")


def _non_positive_float(text: str) -> float:
    value = float(text)
    if value > 0:
        raise argparse.ArgumentTypeError("must be <= 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _int_grid(text: str) -> list[int]:
    try:
        grid = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not grid:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return grid


def _fun_arg(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected key=value")
    key, raw = text.split("=", 1)
    try:
        return key, float(raw)
    except ValueError:
        return key, raw


def _resolve_workers(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        workers = int(env)
        if workers < 1:
            raise ValueError(f"{WORKERS_ENV_VAR} must be >= 1, got {env}")
        return workers
    return 1


def _ensemble_spec(name: str, grid_size: int) -> EnsembleSpec:
    if name == "simple_mean":
        return EnsembleSpec("simple_ensemble", "mean", grid_size)
    if name == "simple_median":
        return EnsembleSpec("simple_ensemble", "median", grid_size)
    return EnsembleSpec("linear_pool", "mean", grid_size)


def _write_output(path: str | None, writer: Callable[[IO[str]], None]) -> None:
    if path is None:
        writer(sys.stdout)
    else:
        with open(path, "w", encoding="utf-8", newline="") as stream:
            writer(stream)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemble-importance",
        description="Per-model contribution scores for multi-model ensemble forecasts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="compute per-task importance scores")
    p.add_argument("--forecasts", required=True, help="forecast table CSV")
    p.add_argument("--oracle", required=True, help="oracle (ground truth) CSV")
    p.add_argument("--ensemble", choices=ENSEMBLE_CHOICES, default="simple_mean")
    p.add_argument("--algorithm", choices=("lomo", "lasomo"), default="lomo")
    p.add_argument("--subset-wt", choices=("equal", "perm_based"), default="equal")
    p.add_argument(
        "--min-log-score", type=_non_positive_float, default=DEFAULT_MIN_LOG_SCORE
    )
    p.add_argument("--grid-size", type=_positive_int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--lasomo-cap", type=_positive_int, default=DEFAULT_LASOMO_CAP)
    p.add_argument("--validation", choices=("error", "skip"), default="error")
    p.add_argument("--workers", type=_positive_int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("aggregate", help="aggregate scores across tasks")
    p.add_argument("--scores", required=True, help="importance table from `score`")
    p.add_argument("--by", default="model_id", help="comma-separated group columns")
    p.add_argument("--na-action", choices=("drop", "worst", "average"), default="drop")
    p.add_argument("--fun", choices=("mean", "median", "quantile"), default="mean")
    p.add_argument(
        "--fun-arg",
        type=_fun_arg,
        action="append",
        default=[],
        help="extra argument for --fun, e.g. probs=0.25",
    )
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    p.set_defaults(handler=cmd_aggregate)

    p = sub.add_parser("summary", help="summarize scores: counts, ranges, winners")
    p.add_argument("--scores", required=True, help="importance table from `score`")
    p.add_argument("--preview-rows", type=int, default=3)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None)
    p.set_defaults(handler=cmd_summary)

    p = sub.add_parser("bench", help="synthetic scaling benchmark")
    p.add_argument("--models-grid", type=_int_grid, required=True)
    p.add_argument("--tasks-grid", type=_int_grid, required=True)
    p.add_argument("--algorithm", choices=("lomo", "lasomo"), default="lomo")
    p.add_argument("--subset-wt", choices=("equal", "perm_based"), default="equal")
    p.add_argument("--workers", type=_positive_int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lasomo-cap", type=_positive_int, default=DEFAULT_LASOMO_CAP)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    p.set_defaults(handler=cmd_bench)

    return parser


def cmd_score(args: argparse.Namespace) -> int:
    with open(args.forecasts, "rb") as fh:
        forecasts = parse_forecast_table(fh)
    with open(args.oracle, "rb") as fh:
        oracle = parse_oracle_table(fh)
    config = RunConfig(
        ensemble=_ensemble_spec(args.ensemble, args.grid_size),
        algorithm=args.algorithm,
        subset_wt=args.subset_wt,
        min_log_score=args.min_log_score,
        workers=_resolve_workers(args.workers),
        validation_policy=args.validation,
        lasomo_cap=args.lasomo_cap,
    )
    table = model_importance(forecasts, oracle, config, verbose=True)
    writer = write_importance_csv if args.format == "csv" else write_importance_json
    _write_output(args.output, lambda stream: writer(table, stream))
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    with open(args.scores, "r", encoding="utf-8") as fh:
        table = read_importance_table(fh)
    by = [c for c in args.by.split(",") if c]
    try:
        agg = aggregate(
            table,
            by=by,
            na_action=args.na_action,
            fun=args.fun,
            fun_args=dict(args.fun_arg),
        )
    except ValueError as exc:
        raise EnsembleImportanceError(str(exc)) from exc
    print(format_aggregate_text(agg), file=sys.stderr, end="")
    writer = write_aggregate_csv if args.format == "csv" else write_aggregate_json
    _write_output(args.output, lambda stream: writer(agg, stream))
    return 0


def cmd_summary(args: argparse.Namespace) -> int:
    with open(args.scores, "r", encoding="utf-8") as fh:
        table = read_importance_table(fh)
    try:
        report = summarize(table, preview_rows=args.preview_rows)
    except ValueError as exc:
        raise EnsembleImportanceError(str(exc)) from exc
    if args.format == "text":
        _write_output(args.output, lambda s: s.write(format_summary_text(report)))
    else:
        def writer(stream: IO[str]) -> None:
            json.dump(summary_to_dict(report), stream, indent=2)
            stream.write("\n")
        _write_output(args.output, writer)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cells = run_bench(
        algorithm=args.algorithm,
        models_grid=args.models_grid,
        tasks_grid=args.tasks_grid,
        workers=_resolve_workers(args.workers),
        seed=args.seed,
        subset_wt=args.subset_wt,
        lasomo_cap=args.lasomo_cap,
    )
    for c in cells:
        print(
            f"[bench] {c.algorithm} n_models={c.n_models} n_tasks={c.n_tasks} "
            f"workers={c.workers} evaluations={c.evaluations} "
            f"elapsed={c.elapsed_seconds:.3f}s",
            file=sys.stderr,
        )
    writer = write_bench_csv if args.format == "csv" else write_bench_json
    _write_output(args.output, lambda stream: writer(cells, stream))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except EnsembleImportanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
