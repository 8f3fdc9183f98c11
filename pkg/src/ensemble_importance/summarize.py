"""Aggregate per-task importance into model-level summaries and reports."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from statistics import fmean, median
from typing import IO, Callable, Mapping, Sequence

import numpy as np

from .data_model import TaskKey
from .importance import ImportanceRow, ImportanceTable

NA_TEXT = "NA"


def impute(
    task_scores: Mapping[str, float | None], action: str
) -> dict[str, float | None]:
    """Apply one NA policy to the scores of a single task.

    drop removes missing entries; worst fills them with the task's minimum
    non-missing score; average fills them with the task's mean score.
    """
    present = [v for v in task_scores.values() if v is not None]
    if not present:
        raise ValueError("cannot impute a task where every score is missing")
    if action == "drop":
        return {m: v for m, v in task_scores.items() if v is not None}
    if action == "worst":
        fill: float = min(present)
    elif action == "average":
        fill = fmean(present)
    else:
        raise ValueError(f"unknown na_action: {action!r}")
    return {m: (fill if v is None else v) for m, v in task_scores.items()}


@dataclass(frozen=True)
class AggregateRow:
    group: tuple[str, ...]
    value: float | None


@dataclass(frozen=True)
class AggregateTable:
    group_columns: tuple[str, ...]
    value_column: str
    rows: tuple[AggregateRow, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return (*self.group_columns, self.value_column)


def _resolve_fun(
    fun: str | Callable[..., float], fun_args: Mapping[str, object] | None
) -> tuple[str, Callable[[list[float]], float]]:
    args = dict(fun_args or {})
    if callable(fun):
        name = getattr(fun, "__name__", "fun")
        return name, lambda values: float(fun(values, **args))
    if fun == "mean":
        return "mean", fmean
    if fun == "median":
        return "median", lambda values: float(median(values))
    if fun == "quantile":
        if "probs" not in args:
            raise ValueError("fun='quantile' requires a 'probs' argument")
        probs = float(args["probs"])  # type: ignore[arg-type]
        if not 0.0 <= probs <= 1.0:
            raise ValueError(f"quantile probs must be in [0, 1], got {probs}")
        return "quantile", lambda values: float(np.quantile(values, probs))
    raise ValueError(f"unknown summary function: {fun!r}")


def _row_value(row: ImportanceRow, column: str, task_columns: Sequence[str]) -> str:
    if column == "model_id":
        return row.model_id
    if column == "output_type":
        return row.output_type
    return row.task[list(task_columns).index(column)]


def aggregate(
    scores: ImportanceTable,
    by: str | Sequence[str] = ("model_id",),
    na_action: str = "drop",
    fun: str | Callable[..., float] = "mean",
    fun_args: Mapping[str, object] | None = None,
) -> AggregateTable:
    """Summarize importance scores per group after per-task NA handling.

    Imputation runs task by task first, then ``fun`` reduces each group's
    scores. Output rows are sorted by descending summary value (ties by
    group key); a group whose scores were all dropped keeps a row with a
    missing value rather than disappearing.
    """
    by_cols = (by,) if isinstance(by, str) else tuple(by)
    known = set(scores.columns) - {"importance"}
    for c in by_cols:
        if c not in known:
            raise ValueError(f"unknown column in by: {c!r}")

    by_task: dict[TaskKey, dict[str, float | None]] = {}
    for row in scores.rows:
        by_task.setdefault(row.task, {})[row.model_id] = row.importance
    kept: dict[tuple[str, TaskKey], float] = {}
    for task, task_scores in by_task.items():
        for m, v in impute(task_scores, na_action).items():
            if v is not None:
                kept[(m, task)] = v

    groups: dict[tuple[str, ...], list[float]] = {}
    task_cols = scores.task_columns
    for row in scores.rows:
        gkey = tuple(_row_value(row, c, task_cols) for c in by_cols)
        values = groups.setdefault(gkey, [])
        v = kept.get((row.model_id, row.task))
        if v is not None:
            values.append(v)

    name, reducer = _resolve_fun(fun, fun_args)
    rows = [
        AggregateRow(gkey, reducer(values) if values else None)
        for gkey, values in groups.items()
    ]
    rows.sort(
        key=lambda r: ((1, 0.0) if r.value is None else (0, -r.value), r.group)
    )
    return AggregateTable(by_cols, f"importance_score_{name}", tuple(rows))


@dataclass(frozen=True)
class ModelSummary:
    model_id: str
    n_tasks: int
    min_importance: float | None
    max_importance: float | None
    n_na: int


@dataclass(frozen=True)
class TaskWinner:
    task: TaskKey
    top_model: str
    max_score: float


@dataclass(frozen=True)
class SummaryReport:
    n_models: int
    n_tasks: int
    task_columns: tuple[str, ...]
    all_tasks: tuple[TaskKey, ...]
    model_summary: tuple[ModelSummary, ...]
    task_winners: tuple[TaskWinner, ...]
    preview_rows: int


def summarize(scores: ImportanceTable, preview_rows: int = 3) -> SummaryReport:
    """Build the summary report: counts, task list, per-model ranges, winners.

    The winner of a task is the model with the highest importance there;
    ties break lexicographically by model_id.
    """
    if not scores.rows:
        raise ValueError("cannot summarize an empty importance table")
    if preview_rows < 0:
        raise ValueError("preview_rows must be >= 0")

    by_task: dict[TaskKey, dict[str, float | None]] = {}
    models = sorted({r.model_id for r in scores.rows})
    for row in scores.rows:
        by_task.setdefault(row.task, {})[row.model_id] = row.importance
    tasks = tuple(sorted(by_task))

    model_summary = []
    for m in models:
        values = [
            by_task[t][m]
            for t in tasks
            if m in by_task[t] and by_task[t][m] is not None
        ]
        model_summary.append(
            ModelSummary(
                model_id=m,
                n_tasks=len(tasks),
                min_importance=min(values) if values else None,
                max_importance=max(values) if values else None,
                n_na=len(tasks) - len(values),
            )
        )

    winners = []
    for t in tasks:
        scored = [(m, v) for m, v in by_task[t].items() if v is not None]
        if not scored:
            continue
        best = max(v for _, v in scored)
        top = min(m for m, v in scored if v == best)
        winners.append(TaskWinner(t, top, best))

    return SummaryReport(
        n_models=len(models),
        n_tasks=len(tasks),
        task_columns=scores.task_columns,
        all_tasks=tasks,
        model_summary=tuple(model_summary),
        task_winners=tuple(winners),
        preview_rows=preview_rows,
    )


def _grid(header: Sequence[str], rows: Sequence[Sequence[str]], right: set[int]) -> list[str]:
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
        for i, h in enumerate(header)
    ]
    def fmt(cells: Sequence[str]) -> str:
        parts = [
            c.rjust(widths[i]) if i in right else c.ljust(widths[i])
            for i, c in enumerate(cells)
        ]
        return "  ".join(parts).rstrip()
    return [fmt(header)] + [fmt(r) for r in rows]


def _num(value: float | None, digits: int = 2) -> str:
    return NA_TEXT if value is None else f"{value:.{digits}f}"


def format_importance_table(table: ImportanceTable) -> str:
    """Render the per-task importance table (scores shown to 2 decimals)."""
    header = list(table.columns)
    rows = [
        [r.model_id, *r.task, r.output_type, _num(r.importance)]
        for r in table.rows
    ]
    lines = ["Model importance result by task", "-" * 33]
    lines += _grid(header, rows, right={len(header) - 1})
    return "\n".join(lines) + "\n"


def format_aggregate_text(agg: AggregateTable) -> str:
    """Render the aggregate table echo (scores shown to 1 decimal)."""
    rows = [[*r.group, _num(r.value, digits=1)] for r in agg.rows]
    lines = ["Overall model importance across tasks", "-" * 40]
    lines += _grid(list(agg.columns), rows, right={len(agg.columns) - 1})
    return "\n".join(lines) + "\n"


def format_summary_text(report: SummaryReport) -> str:
    lines = [
        "=== Summary of importance scores by task ===",
        f"Number of models: {report.n_models}",
        f"Number of tasks: {report.n_tasks}",
        "",
    ]
    shown = report.task_winners[: report.preview_rows]
    lines.append(
        f"=== Top scoring model by task "
        f"(showing {len(shown)} of {len(report.task_winners)}) ==="
    )
    header = [*report.task_columns, "top_model", "max_score"]
    rows = [[*w.task, w.top_model, _num(w.max_score)] for w in shown]
    lines += _grid(header, rows, right={len(header) - 1})
    lines.append("")
    lines.append("=== All tasks ===")
    lines += _grid(list(report.task_columns), [list(t) for t in report.all_tasks], right=set())
    lines.append("")
    lines.append("=== Model summary ===")
    header = ["model_id", "n_tasks", "min_importance", "max_importance", "n_NA"]
    rows = [
        [
            s.model_id,
            str(s.n_tasks),
            _num(s.min_importance),
            _num(s.max_importance),
            str(s.n_na),
        ]
        for s in report.model_summary
    ]
    lines += _grid(header, rows, right={1, 2, 3, 4})
    lines.append("")
    lines.append("=== Task winners ===")
    header = [*report.task_columns, "top_model", "max_score"]
    rows = [[*w.task, w.top_model, _num(w.max_score)] for w in report.task_winners]
    lines += _grid(header, rows, right={len(header) - 1})
    return "\n".join(lines) + "\n"


def summary_to_dict(report: SummaryReport) -> dict:
    return {
        "n_models": report.n_models,
        "n_tasks": report.n_tasks,
        "task_columns": list(report.task_columns),
        "all_tasks": [dict(zip(report.task_columns, t)) for t in report.all_tasks],
        "model_summary": [
            {
                "model_id": s.model_id,
                "n_tasks": s.n_tasks,
                "min_importance": s.min_importance,
                "max_importance": s.max_importance,
                "n_NA": s.n_na,
            }
            for s in report.model_summary
        ],
        "task_winners": [
            {
                **dict(zip(report.task_columns, w.task)),
                "top_model": w.top_model,
                "max_score": w.max_score,
            }
            for w in report.task_winners
        ],
        "preview_rows": report.preview_rows,
    }


def summary_from_dict(data: Mapping) -> SummaryReport:
    task_columns = tuple(data["task_columns"])
    return SummaryReport(
        n_models=int(data["n_models"]),
        n_tasks=int(data["n_tasks"]),
        task_columns=task_columns,
        all_tasks=tuple(
            tuple(str(t[c]) for c in task_columns) for t in data["all_tasks"]
        ),
        model_summary=tuple(
            ModelSummary(
                model_id=s["model_id"],
                n_tasks=int(s["n_tasks"]),
                min_importance=s["min_importance"],
                max_importance=s["max_importance"],
                n_na=int(s["n_NA"]),
            )
            for s in data["model_summary"]
        ),
        task_winners=tuple(
            TaskWinner(
                task=tuple(str(w[c]) for c in task_columns),
                top_model=w["top_model"],
                max_score=float(w["max_score"]),
            )
            for w in data["task_winners"]
        ),
        preview_rows=int(data["preview_rows"]),
    )


def write_aggregate_csv(agg: AggregateTable, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(agg.columns)
    for row in agg.rows:
        value = "" if row.value is None else repr(row.value)
        writer.writerow([*row.group, value])


def write_aggregate_json(agg: AggregateTable, stream: IO[str]) -> None:
    records = []
    for row in agg.rows:
        record: dict[str, object] = dict(zip(agg.group_columns, row.group))
        record[agg.value_column] = row.value
        records.append(record)
    json.dump(records, stream, indent=2)
    stream.write("\n")
