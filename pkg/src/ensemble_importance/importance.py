"""Per-task model importance from leave-out ensemble comparisons.

Two attribution algorithms are provided. `lomo_task` scores each model by
the change in ensemble skill when that model alone is removed. `lasomo_task`
sweeps every non-empty subset of the other models and accumulates weighted
marginal skill changes from adding the target model to each subset, in the
style of Shapley values. Subset ensembles are shared across target models,
so one task costs exactly n+1 ensemble evaluations for the former and
2^n - 1 for the latter.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Sequence

from .config import DEFAULT_LASOMO_CAP, DEFAULT_MIN_LOG_SCORE, EnsembleSpec, RunConfig
from .data_model import (
    ForecastTable,
    OracleTable,
    TaskBundle,
    TaskKey,
    ValidationReport,
    join_oracle,
    validate,
)
from .ensemble import Forecast, linear_pool, simple_ensemble
from .errors import ModelCapError, TaskComputationError
from .scoring import score


@dataclass
class EvalCounter:
    """Counts distinct ensemble constructions (one per scored subset)."""

    count: int = 0

    def add(self, k: int = 1) -> None:
        self.count += k


def subset_weight(n: int, k: int, scheme: str) -> Fraction:
    """Weight of one size-k subset of the n-1 models left after removing
    the target model.

    equal: 1 / (2^(n-1) - 1) regardless of k.
    perm_based: 1 / ((n-1) * C(n-1, k)), the Shapley-style size weighting.
    Either way the weights over all non-empty subsets sum to exactly 1.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    if scheme == "equal":
        return Fraction(1, 2 ** (n - 1) - 1)
    if scheme == "perm_based":
        return Fraction(1, (n - 1) * math.comb(n - 1, k))
    raise ValueError(f"unknown weight scheme: {scheme!r}")


def _combine(forecasts: Sequence[Forecast], spec: EnsembleSpec) -> Forecast:
    if spec.method == "simple_ensemble":
        return simple_ensemble(forecasts, spec.agg_fun)
    return linear_pool(forecasts, spec.grid_size)


def lomo_task(
    bundle: TaskBundle,
    spec: EnsembleSpec,
    min_log_score: float = DEFAULT_MIN_LOG_SCORE,
    counter: EvalCounter | None = None,
) -> dict[str, float]:
    """Leave-one-model-out importance for every model in one task."""
    models = sorted(bundle.forecasts)
    if len(models) < 2:
        raise TaskComputationError(
            f"task ({bundle.label}) has {len(models)} model(s); need at least 2"
        )
    try:
        full = _combine([bundle.forecasts[m] for m in models], spec)
        psi_full = score(full, bundle.truth, min_log_score)
        if counter is not None:
            counter.add()
        result = {}
        for m in models:
            rest = _combine([bundle.forecasts[x] for x in models if x != m], spec)
            if counter is not None:
                counter.add()
            result[m] = psi_full - score(rest, bundle.truth, min_log_score)
        return result
    except ValueError as exc:
        raise TaskComputationError(f"task ({bundle.label}): {exc}") from exc


def lasomo_task(
    bundle: TaskBundle,
    spec: EnsembleSpec,
    scheme: str = "equal",
    min_log_score: float = DEFAULT_MIN_LOG_SCORE,
    cap: int = DEFAULT_LASOMO_CAP,
    counter: EvalCounter | None = None,
) -> dict[str, float]:
    """Subset-sweep importance for every model in one task.

    Every non-empty subset ensemble is scored exactly once (memoized by
    subset bitmask) and shared across all target models.
    """
    models = sorted(bundle.forecasts)
    n = len(models)
    if n < 2:
        raise TaskComputationError(
            f"task ({bundle.label}) has {n} model(s); need at least 2"
        )
    if n > cap:
        raise ModelCapError(
            f"task ({bundle.label}) has {n} models; the subset sweep would "
            f"evaluate 2^{n} - 1 = {2 ** n - 1} ensembles (cap {cap}); raise "
            f"the cap to proceed"
        )
    forecasts = [bundle.forecasts[m] for m in models]
    full_mask = (1 << n) - 1
    psi = [0.0] * (full_mask + 1)
    try:
        for mask in range(1, full_mask + 1):
            members = [forecasts[i] for i in range(n) if mask >> i & 1]
            psi[mask] = score(_combine(members, spec), bundle.truth, min_log_score)
    except ValueError as exc:
        raise TaskComputationError(f"task ({bundle.label}): {exc}") from exc
    if counter is not None:
        counter.add(full_mask)

    weight = [0.0] * n
    for k in range(1, n):
        weight[k] = float(subset_weight(n, k, scheme))

    result = {}
    for i, m in enumerate(models):
        bit = 1 << i
        rest = full_mask ^ bit
        acc = 0.0
        sub = rest
        while sub:
            acc += weight[sub.bit_count()] * (psi[sub | bit] - psi[sub])
            sub = (sub - 1) & rest
        result[m] = acc
    return result


def _task_scores(job: tuple[TaskBundle, RunConfig]) -> tuple[TaskKey, dict[str, float], int]:
    bundle, config = job
    counter = EvalCounter()
    if config.algorithm == "lomo":
        scores = lomo_task(bundle, config.ensemble, config.min_log_score, counter)
    else:
        scores = lasomo_task(
            bundle,
            config.ensemble,
            config.subset_wt,
            config.min_log_score,
            config.lasomo_cap,
            counter,
        )
    return bundle.key, scores, counter.count


def worker_pool(workers: int):
    """Pool for task-level parallelism (fork where available, else spawn)."""
    methods = multiprocessing.get_all_start_methods()
    ctx = multiprocessing.get_context("fork" if "fork" in methods else None)
    return ctx.Pool(workers)


def compute_task_scores(
    bundles: Sequence[TaskBundle],
    config: RunConfig,
    pool=None,
) -> tuple[dict[TaskKey, dict[str, float]], int]:
    """Run the configured algorithm over all bundles, optionally in parallel.

    Tasks are independent work units; results are merged by task key, so
    the outcome is identical for any worker count. A caller holding a
    long-lived pool may pass it in; otherwise one is created per call when
    config.workers > 1. Returns the per-task score maps and the exact
    total number of ensemble evaluations.
    """
    jobs = [(b, config) for b in bundles]
    if pool is None and config.workers > 1 and len(jobs) > 1:
        with worker_pool(config.workers) as own_pool:
            return compute_task_scores(bundles, config, pool=own_pool)
    if pool is not None and len(jobs) > 1:
        chunksize = max(1, len(jobs) // (config.workers * 4))
        results = pool.map(_task_scores, jobs, chunksize=chunksize)
    else:
        results = [_task_scores(j) for j in jobs]
    scores = {key: task_scores for key, task_scores, _ in results}
    evaluations = sum(n for _, _, n in results)
    return scores, evaluations


@dataclass(frozen=True)
class ImportanceRow:
    """One (model, task) importance entry; None means the model skipped the task."""

    model_id: str
    task: TaskKey
    output_type: str
    importance: float | None


@dataclass(frozen=True)
class ImportanceTable:
    """Per-task importance scores, one row per (model, task) pair.

    task_columns start with reference_date followed by the remaining
    task-ID columns in ingest order; rows are sorted by task key then
    model_id.
    """

    task_columns: tuple[str, ...]
    rows: tuple[ImportanceRow, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return ("model_id", *self.task_columns, "output_type", "importance")


def run_header(report: ValidationReport, workers: int) -> list[str]:
    """Informative lines describing the run: date range, models, checks."""
    lines = []
    if report.date_range is None:
        lines.append("Evaluating forecasts: no rows found.")
    else:
        lines.append(
            f"Evaluating forecasts from {report.date_range[0]} to "
            f"{report.date_range[1]} (a total of {report.n_dates} forecast date(s))."
        )
    lines.append("The available model IDs are:")
    for m in report.models:
        lines.append(f"    {m}")
    lines.append(f"(a total of {len(report.models)} models)")
    lines.append(
        f"Note: tasks are scored independently; this run uses {workers} worker "
        f"process(es). Set --workers to parallelize across tasks."
    )
    if report.ok:
        lines.append("All tasks meet the minimum model requirement of 2 models.")
    else:
        lines.append(
            f"Excluded {len(report.excluded)} task(s) that failed validation "
            f"(minimum model requirement of 2 models or malformed entries)."
        )
    return lines


def _output_task_columns(task_columns: Sequence[str]) -> tuple[str, ...]:
    rest = tuple(c for c in task_columns if c != "reference_date")
    return ("reference_date", *rest) if "reference_date" in task_columns else tuple(rest)


def model_importance(
    forecasts: ForecastTable,
    oracle: OracleTable,
    config: RunConfig | None = None,
    verbose: bool = True,
) -> ImportanceTable:
    """Compute the importance of every model for every prediction task.

    Validates the forecast table under the configured policy, joins the
    oracle, scores each task with the configured algorithm and ensemble
    method, and assembles one row per (model, task) over the union of
    models appearing in any evaluated task, with missing importance where
    a model skipped the task.
    """
    config = config or RunConfig()
    report = validate(forecasts, config.validation_policy)
    if verbose:
        print("\n".join(run_header(report, config.workers)), file=sys.stderr)

    out_columns = _output_task_columns(forecasts.task_columns)
    reorder = [forecasts.task_columns.index(c) for c in out_columns]

    bundles = join_oracle(forecasts, oracle, exclude=report.excluded)
    if not bundles:
        if verbose:
            print("warning: no tasks to evaluate", file=sys.stderr)
        return ImportanceTable(out_columns, ())

    scores_by_key, _ = compute_task_scores(bundles, config)
    models = sorted({m for b in bundles for m in b.forecasts})
    output_type = forecasts.output_type or ""

    keyed = sorted(
        (tuple(key[i] for i in reorder), key) for key in scores_by_key
    )
    rows = []
    for out_key, key in keyed:
        task_scores = scores_by_key[key]
        for m in models:
            rows.append(ImportanceRow(m, out_key, output_type, task_scores.get(m)))
    return ImportanceTable(out_columns, tuple(rows))


def write_importance_csv(table: ImportanceTable, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        imp = "" if row.importance is None else repr(row.importance)
        writer.writerow([row.model_id, *row.task, row.output_type, imp])


def write_importance_json(table: ImportanceTable, stream: IO[str]) -> None:
    records = []
    for row in table.rows:
        record: dict[str, object] = {"model_id": row.model_id}
        record.update(zip(table.task_columns, row.task))
        record["output_type"] = row.output_type
        record["importance"] = row.importance
        records.append(record)
    json.dump(records, stream, indent=2)
    stream.write("\n")


def read_importance_table(source: IO[str] | str) -> ImportanceTable:
    """Read an importance table previously written as CSV or JSON."""
    text = source if isinstance(source, str) else source.read()
    if text.lstrip().startswith("["):
        records = json.loads(text)
        if not records:
            return ImportanceTable((), ())
        columns = list(records[0])
        task_columns = tuple(
            c for c in columns if c not in ("model_id", "output_type", "importance")
        )
        rows = tuple(
            ImportanceRow(
                str(r["model_id"]),
                tuple(str(r[c]) for c in task_columns),
                str(r.get("output_type", "")),
                None if r.get("importance") is None else float(r["importance"]),
            )
            for r in records
        )
        return ImportanceTable(task_columns, rows)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return ImportanceTable((), ())
    idx = {c: i for i, c in enumerate(header)}
    for required in ("model_id", "importance"):
        if required not in idx:
            raise ValueError(f"importance table is missing the {required} column")
    task_columns = tuple(
        c for c in header if c not in ("model_id", "output_type", "importance")
    )
    rows = []
    for record in reader:
        imp_text = record[idx["importance"]]
        rows.append(
            ImportanceRow(
                record[idx["model_id"]],
                tuple(record[idx[c]] for c in task_columns),
                record[idx["output_type"]] if "output_type" in idx else "",
                None if imp_text == "" else float(imp_text),
            )
        )
    return ImportanceTable(task_columns, tuple(rows))
