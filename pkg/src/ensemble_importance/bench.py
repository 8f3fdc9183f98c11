"""Synthetic scaling benchmark: evaluation counts and wall time per grid cell.

Panels of point forecasts (median output type) are generated
deterministically from the seed, so evaluation counts and scores are
reproducible; elapsed wall time is hardware-dependent and reported for
qualitative comparison only.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .config import DEFAULT_LASOMO_CAP, RunConfig
from .data_model import TaskBundle
from .ensemble import Forecast
from .errors import ModelCapError
from .importance import compute_task_scores, worker_pool

BENCH_TASK_COLUMNS = ("reference_date", "task")


@dataclass(frozen=True)
class BenchCell:
    algorithm: str
    n_models: int
    n_tasks: int
    workers: int
    evaluations: int
    elapsed_seconds: float


def synthetic_bundles(n_models: int, n_tasks: int, seed: int) -> list[TaskBundle]:
    """Deterministic point-forecast panel: per task, a truth value and one
    noisy forecast per model."""
    rng = np.random.default_rng([seed, n_models, n_tasks])
    bundles = []
    for t in range(n_tasks):
        truth = float(rng.uniform(50.0, 5000.0))
        forecasts = {
            f"model_{i:03d}": Forecast(
                "median", ("",), (float(truth * rng.normal(1.0, 0.25)),)
            )
            for i in range(n_models)
        }
        bundles.append(
            TaskBundle(
                key=("2026-01-03", f"task_{t:05d}"),
                task_columns=BENCH_TASK_COLUMNS,
                output_type="median",
                forecasts=forecasts,
                truth=truth,
            )
        )
    return bundles


def run_bench(
    algorithm: str,
    models_grid: Sequence[int],
    tasks_grid: Sequence[int],
    workers: int = 1,
    seed: int = 0,
    subset_wt: str = "equal",
    lasomo_cap: int = DEFAULT_LASOMO_CAP,
) -> list[BenchCell]:
    """Time the chosen algorithm over the (n_models, n_tasks) grid."""
    if not models_grid or not tasks_grid:
        raise ValueError("models and tasks grids must be non-empty")
    if min(models_grid) < 2:
        raise ValueError("every grid entry needs at least 2 models")
    if algorithm == "lasomo" and max(models_grid) > lasomo_cap:
        raise ModelCapError(
            f"grid includes {max(models_grid)} models; the subset sweep would "
            f"evaluate 2^{max(models_grid)} - 1 = {2 ** max(models_grid) - 1} "
            f"ensembles per task (cap {lasomo_cap})"
        )
    config = RunConfig(
        algorithm=algorithm,
        subset_wt=subset_wt,
        workers=workers,
        lasomo_cap=lasomo_cap,
        seed=seed,
    )
    # one pool for the whole sweep: per-cell timings measure the algorithm,
    # not worker startup
    pool = worker_pool(workers) if workers > 1 else None
    try:
        if pool is not None:
            pool.map(len, [()] * workers)  # warm the workers up
        cells = []
        for n in models_grid:
            for t in tasks_grid:
                bundles = synthetic_bundles(n, t, seed)
                start = time.perf_counter()
                _, evaluations = compute_task_scores(bundles, config, pool=pool)
                elapsed = time.perf_counter() - start
                cells.append(BenchCell(algorithm, n, t, workers, evaluations, elapsed))
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()
    return cells


BENCH_COLUMNS = (
    "algorithm",
    "n_models",
    "n_tasks",
    "workers",
    "evaluations",
    "elapsed_seconds",
)


def write_bench_csv(cells: Sequence[BenchCell], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for c in cells:
        writer.writerow(
            [c.algorithm, c.n_models, c.n_tasks, c.workers, c.evaluations,
             f"{c.elapsed_seconds:.6f}"]
        )


def write_bench_json(cells: Sequence[BenchCell], stream: IO[str]) -> None:
    records = [
        {
            "algorithm": c.algorithm,
            "n_models": c.n_models,
            "n_tasks": c.n_tasks,
            "workers": c.workers,
            "evaluations": c.evaluations,
            "elapsed_seconds": round(c.elapsed_seconds, 6),
        }
        for c in cells
    ]
    json.dump(records, stream, indent=2)
    stream.write("\n")
