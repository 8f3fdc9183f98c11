"""Parse, validate, and index hubverse-style forecast and oracle tables.

Forecast tables are long format: one row per prediction component, with a
model_id column, task-ID columns (reference_date, target, horizon,
location, ...), an output_type column, an optional output_type_id column,
and a value column. Oracle tables carry ground truth in an oracle_value
column keyed by a subset of the forecast task-ID columns.

All tables are immutable after construction and safe to share read-only
across worker processes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from datetime import date
from typing import IO, Iterable, Mapping, Sequence

from .ensemble import Forecast, canonical_level
from .errors import DataValidationError

OUTPUT_TYPES = ("mean", "median", "quantile", "pmf")
POINT_TYPES = ("mean", "median")
REFERENCE_DATE_ALIASES = ("reference_date", "forecast_date", "origin_date")
RESERVED_COLUMNS = ("model_id", "output_type", "output_type_id", "value")
PMF_SUM_TOL = 1e-6
MIN_MODELS_PER_TASK = 2

TaskKey = tuple[str, ...]


def task_label(task_columns: Sequence[str], key: TaskKey) -> str:
    """Human-readable rendering of one task key, for error messages."""
    return ", ".join(f"{c}={v}" for c, v in zip(task_columns, key))


def _read_text(source: IO[bytes] | IO[str] | bytes | str) -> str:
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _single_alias_index(columns: Sequence[str], aliases: Sequence[str]) -> int:
    hits = [i for i, c in enumerate(columns) if c in aliases]
    if not hits:
        raise DataValidationError(
            f"no reference-date column found; expected one of {tuple(aliases)}"
        )
    if len(hits) > 1:
        names = tuple(columns[i] for i in hits)
        raise DataValidationError(f"ambiguous reference-date columns: {names}")
    return hits[0]


@dataclass(frozen=True)
class ForecastRow:
    """One prediction component; task values align with the table's task_columns."""

    model_id: str
    task: TaskKey
    output_type_id: str
    value: float
    value_text: str


@dataclass(frozen=True)
class ForecastTable:
    """Typed long-format forecast table with a single output type."""

    columns: tuple[str, ...]
    task_columns: tuple[str, ...]
    output_type: str | None
    rows: tuple[ForecastRow, ...]


@dataclass(frozen=True)
class OracleRow:
    task: TaskKey
    output_type: str
    output_type_id: str
    oracle_value: float


@dataclass(frozen=True)
class OracleTable:
    """Ground-truth table keyed by a subset of the forecast task-ID columns."""

    columns: tuple[str, ...]
    task_columns: tuple[str, ...]
    rows: tuple[OracleRow, ...]


@dataclass(frozen=True)
class TaskBundle:
    """All forecasts for one task, joined with its ground truth."""

    key: TaskKey
    task_columns: tuple[str, ...]
    output_type: str
    forecasts: Mapping[str, Forecast]
    truth: float | str

    @property
    def label(self) -> str:
        return task_label(self.task_columns, self.key)


def parse_forecast_table(
    source: IO[bytes] | IO[str] | bytes | str, format: str = "csv"
) -> ForecastTable:
    """Parse a forecast table from CSV, standardizing the reference-date column.

    The header must contain model_id, output_type, value, exactly one
    reference-date alias, and at least one task-ID column. Exactly one
    output type may appear in the body; empty output_type_id means absent.
    """
    if format != "csv":
        raise ValueError(f"unsupported format: {format!r}")
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = next(reader)
    except StopIteration:
        raise DataValidationError("empty input: no header row") from None
    if len(set(header)) != len(header):
        raise DataValidationError(f"duplicate column names in header: {header}")

    alias_idx = _single_alias_index(header, REFERENCE_DATE_ALIASES)
    columns = list(header)
    columns[alias_idx] = "reference_date"

    for required in ("model_id", "output_type", "value"):
        if required not in columns:
            raise DataValidationError(f"missing mandatory column: {required}")
    task_columns = tuple(c for c in columns if c not in RESERVED_COLUMNS)
    if not task_columns:
        raise DataValidationError("no task-ID columns found")

    idx = {c: i for i, c in enumerate(columns)}
    has_id_col = "output_type_id" in idx
    ref_idx = idx["reference_date"]

    rows: list[ForecastRow] = []
    table_output_type: str | None = None
    for lineno, record in enumerate(reader, start=2):
        if len(record) != len(columns):
            raise DataValidationError(
                f"row {lineno}: expected {len(columns)} fields, got {len(record)}"
            )
        model_id = record[idx["model_id"]]
        if not model_id:
            raise DataValidationError(f"row {lineno}: empty model_id")
        output_type = record[idx["output_type"]]
        if output_type not in OUTPUT_TYPES:
            raise DataValidationError(
                f"row {lineno}: unsupported output type {output_type!r}"
            )
        if table_output_type is None:
            table_output_type = output_type
        elif output_type != table_output_type:
            raise DataValidationError(
                f"row {lineno}: mixed output types "
                f"({table_output_type!r} and {output_type!r})"
            )
        value_text = record[idx["value"]]
        try:
            value = float(value_text)
        except ValueError:
            raise DataValidationError(
                f"row {lineno}: unparseable value {value_text!r}"
            ) from None
        try:
            date.fromisoformat(record[ref_idx])
        except ValueError:
            raise DataValidationError(
                f"row {lineno}: unparseable reference date {record[ref_idx]!r}"
            ) from None
        output_type_id = record[idx["output_type_id"]] if has_id_col else ""
        _check_output_type_id(output_type, output_type_id, lineno)
        task = tuple(record[idx[c]] for c in task_columns)
        rows.append(ForecastRow(model_id, task, output_type_id, value, value_text))

    return ForecastTable(tuple(columns), task_columns, table_output_type, tuple(rows))


def _check_output_type_id(output_type: str, output_type_id: str, lineno: int) -> None:
    if output_type in POINT_TYPES:
        if output_type_id:
            raise DataValidationError(
                f"row {lineno}: output_type_id must be empty for "
                f"{output_type!r} forecasts, got {output_type_id!r}"
            )
        return
    if not output_type_id:
        raise DataValidationError(
            f"row {lineno}: output_type_id required for {output_type!r} forecasts"
        )
    if output_type == "quantile":
        try:
            level = float(output_type_id)
        except ValueError:
            raise DataValidationError(
                f"row {lineno}: invalid quantile level {output_type_id!r}"
            ) from None
        if not 0.0 < level < 1.0:
            raise DataValidationError(
                f"row {lineno}: quantile level {output_type_id!r} outside (0, 1)"
            )


def standardize_reference_date(
    table: ForecastTable, aliases: Sequence[str] = REFERENCE_DATE_ALIASES
) -> ForecastTable:
    """Rename the single reference-date alias column to `reference_date`."""
    alias_idx = _single_alias_index(table.columns, aliases)
    old = table.columns[alias_idx]
    if old == "reference_date":
        return table
    columns = tuple("reference_date" if c == old else c for c in table.columns)
    task_columns = tuple(
        "reference_date" if c == old else c for c in table.task_columns
    )
    return replace(table, columns=columns, task_columns=task_columns)


def serialize_forecast_table(table: ForecastTable) -> str:
    """Write the table back to CSV text, preserving values bit-exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    task_idx = {c: i for i, c in enumerate(table.task_columns)}
    for row in table.rows:
        record = []
        for col in table.columns:
            if col == "model_id":
                record.append(row.model_id)
            elif col == "output_type":
                record.append(table.output_type or "")
            elif col == "output_type_id":
                record.append(row.output_type_id)
            elif col == "value":
                record.append(row.value_text)
            else:
                record.append(row.task[task_idx[col]])
        writer.writerow(record)
    return buf.getvalue()


def parse_oracle_table(source: IO[bytes] | IO[str] | bytes | str) -> OracleTable:
    """Parse an oracle table: task-ID columns plus an oracle_value column."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = next(reader)
    except StopIteration:
        raise DataValidationError("empty oracle input: no header row") from None
    if len(set(header)) != len(header):
        raise DataValidationError(f"duplicate column names in oracle header: {header}")
    if "oracle_value" not in header:
        raise DataValidationError("missing mandatory column: oracle_value")
    task_columns = tuple(
        c for c in header if c not in ("oracle_value", "output_type", "output_type_id")
    )
    if not task_columns:
        raise DataValidationError("oracle table has no task-ID columns")
    idx = {c: i for i, c in enumerate(header)}

    rows: list[OracleRow] = []
    for lineno, record in enumerate(reader, start=2):
        if len(record) != len(header):
            raise DataValidationError(
                f"oracle row {lineno}: expected {len(header)} fields, got {len(record)}"
            )
        output_type = record[idx["output_type"]] if "output_type" in idx else ""
        if output_type and output_type not in OUTPUT_TYPES:
            raise DataValidationError(
                f"oracle row {lineno}: unsupported output type {output_type!r}"
            )
        value_text = record[idx["oracle_value"]]
        try:
            value = float(value_text)
        except ValueError:
            raise DataValidationError(
                f"oracle row {lineno}: unparseable oracle_value {value_text!r}"
            ) from None
        output_type_id = (
            record[idx["output_type_id"]] if "output_type_id" in idx else ""
        )
        task = tuple(record[idx[c]] for c in task_columns)
        rows.append(OracleRow(task, output_type, output_type_id, value))

    return OracleTable(tuple(header), task_columns, tuple(rows))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validating a forecast table.

    Violation lists hold the offending task keys, sorted; under the `skip`
    policy their union appears in `excluded`, under `error` any violation
    raises instead of producing a report.
    """

    models: tuple[str, ...]
    n_rows: int
    date_range: tuple[str, str] | None
    n_dates: int
    task_columns: tuple[str, ...]
    tasks: tuple[TaskKey, ...]
    below_minimum: tuple[TaskKey, ...]
    id_mismatches: tuple[TaskKey, ...]
    level_violations: tuple[TaskKey, ...]
    duplicates: tuple[TaskKey, ...]
    pmf_violations: tuple[TaskKey, ...]
    excluded: tuple[TaskKey, ...]

    @property
    def ok(self) -> bool:
        return not (
            self.below_minimum
            or self.id_mismatches
            or self.level_violations
            or self.duplicates
            or self.pmf_violations
        )


_VIOLATION_ORDER = (
    ("below_minimum", f"fewer than {MIN_MODELS_PER_TASK} models submitted"),
    ("id_mismatches", "models disagree on the output_type_id set"),
    ("level_violations", "quantile levels are not strictly increasing"),
    ("duplicates", "duplicate rows for one (model, task, output_type_id)"),
    ("pmf_violations", "pmf probabilities invalid or do not sum to 1"),
)


def validate(table: ForecastTable, policy: str = "error") -> ValidationReport:
    """Check table-level invariants and the 2-model minimum per task.

    policy="error" raises DataValidationError on the first violation (in
    deterministic sorted order); policy="skip" marks offending tasks as
    excluded in the report instead.
    """
    if policy not in ("error", "skip"):
        raise ValueError(f"policy must be 'error' or 'skip', got {policy!r}")

    by_task: dict[TaskKey, dict[str, list[ForecastRow]]] = {}
    for row in table.rows:
        by_task.setdefault(row.task, {}).setdefault(row.model_id, []).append(row)

    below_minimum: set[TaskKey] = set()
    id_mismatches: set[TaskKey] = set()
    level_violations: set[TaskKey] = set()
    duplicates: set[TaskKey] = set()
    pmf_violations: set[TaskKey] = set()

    for key, models in by_task.items():
        if len(models) < MIN_MODELS_PER_TASK:
            below_minimum.add(key)
        id_sets: set[tuple[str, ...]] = set()
        for rows in models.values():
            ids = [r.output_type_id for r in rows]
            if table.output_type == "quantile":
                ids = [canonical_level(i) for i in ids]
                if len(set(ids)) != len(ids):
                    level_violations.add(key)
            elif len(set(ids)) != len(ids):
                duplicates.add(key)
            if table.output_type == "pmf":
                if any(not 0.0 <= r.value <= 1.0 for r in rows):
                    pmf_violations.add(key)
                elif abs(sum(r.value for r in rows) - 1.0) > PMF_SUM_TOL:
                    pmf_violations.add(key)
            id_sets.add(tuple(sorted(set(ids))))
        if len(id_sets) > 1:
            id_mismatches.add(key)

    violations = {
        "below_minimum": tuple(sorted(below_minimum)),
        "id_mismatches": tuple(sorted(id_mismatches)),
        "level_violations": tuple(sorted(level_violations)),
        "duplicates": tuple(sorted(duplicates)),
        "pmf_violations": tuple(sorted(pmf_violations)),
    }

    if policy == "error":
        for field_name, reason in _VIOLATION_ORDER:
            if violations[field_name]:
                key = violations[field_name][0]
                raise DataValidationError(
                    f"validation failed: {reason} "
                    f"for task ({task_label(table.task_columns, key)})"
                )
        excluded: tuple[TaskKey, ...] = ()
    else:
        excluded = tuple(sorted(set().union(*[set(v) for v in violations.values()])))

    dates: list[str] = []
    if table.rows and "reference_date" in table.task_columns:
        ref_idx = table.task_columns.index("reference_date")
        dates = sorted({row.task[ref_idx] for row in table.rows})
    return ValidationReport(
        models=tuple(sorted({r.model_id for r in table.rows})),
        n_rows=len(table.rows),
        date_range=(dates[0], dates[-1]) if dates else None,
        n_dates=len(dates),
        task_columns=table.task_columns,
        tasks=tuple(sorted(by_task)),
        excluded=excluded,
        **violations,
    )


def _build_forecast(output_type: str, rows: Sequence[ForecastRow]) -> Forecast:
    if output_type in POINT_TYPES:
        if len(rows) != 1:
            raise DataValidationError(
                f"model {rows[0].model_id!r} has {len(rows)} rows for a point forecast"
            )
        return Forecast(output_type, ("",), (rows[0].value,))
    if output_type == "quantile":
        pairs = sorted(
            (float(r.output_type_id), canonical_level(r.output_type_id), r.value)
            for r in rows
        )
        return Forecast(
            "quantile",
            tuple(c for _, c, _ in pairs),
            tuple(v for _, _, v in pairs),
        )
    pairs = sorted((r.output_type_id, r.value) for r in rows)
    return Forecast("pmf", tuple(c for c, _ in pairs), tuple(v for _, v in pairs))


def _oracle_candidates(
    rows: Sequence[OracleRow], output_type: str
) -> list[OracleRow]:
    exact = [r for r in rows if r.output_type == output_type]
    return exact if exact else [r for r in rows if not r.output_type]


def join_oracle(
    table: ForecastTable,
    oracle: OracleTable,
    exclude: Iterable[TaskKey] = (),
) -> list[TaskBundle]:
    """Join forecasts with ground truth, one bundle per task, sorted by key.

    The oracle's task-ID columns must be a subset of the forecast table's;
    the join on those shared columns (plus output_type_id for pmf) must be
    unique. For pmf the truth is the category whose oracle row carries
    oracle_value 1.
    """
    if not table.rows:
        return []
    extra = [c for c in oracle.task_columns if c not in table.task_columns]
    if extra:
        raise DataValidationError(
            f"oracle task-ID columns not present in forecast data: {extra}"
        )
    assert table.output_type is not None

    index: dict[TaskKey, list[OracleRow]] = {}
    seen: set[tuple[TaskKey, str, str]] = set()
    for row in oracle.rows:
        full_key = (row.task, row.output_type, row.output_type_id)
        if full_key in seen:
            raise DataValidationError(
                f"duplicate oracle rows for key "
                f"({task_label(oracle.task_columns, row.task)}, "
                f"output_type_id={row.output_type_id!r})"
            )
        seen.add(full_key)
        index.setdefault(row.task, []).append(row)

    by_task: dict[TaskKey, dict[str, list[ForecastRow]]] = {}
    for row in table.rows:
        by_task.setdefault(row.task, {}).setdefault(row.model_id, []).append(row)

    excluded = set(exclude)
    proj = [table.task_columns.index(c) for c in oracle.task_columns]
    bundles: list[TaskBundle] = []
    for key in sorted(by_task):
        if key in excluded:
            continue
        label = task_label(table.task_columns, key)
        candidates = _oracle_candidates(
            index.get(tuple(key[i] for i in proj), []), table.output_type
        )
        if not candidates:
            raise DataValidationError(f"no matching oracle row for task ({label})")
        truth: float | str
        if table.output_type == "pmf":
            realized = [r.output_type_id for r in candidates if r.oracle_value == 1.0]
            if len(realized) != 1:
                raise DataValidationError(
                    f"oracle must mark exactly one realized category with "
                    f"oracle_value 1 for task ({label}); found {len(realized)}"
                )
            truth = realized[0]
        else:
            if len(candidates) > 1:
                raise DataValidationError(
                    f"duplicate oracle rows join task ({label})"
                )
            truth = candidates[0].oracle_value
        forecasts = {
            model: _build_forecast(table.output_type, rows)
            for model, rows in by_task[key].items()
        }
        bundles.append(
            TaskBundle(key, table.task_columns, table.output_type, forecasts, truth)
        )
    return bundles
