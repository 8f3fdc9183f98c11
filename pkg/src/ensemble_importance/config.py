"""Run configuration dataclasses and package-wide defaults."""

from __future__ import annotations

from dataclasses import dataclass, field

ENSEMBLE_METHODS = ("simple_ensemble", "linear_pool")
AGG_FUNS = ("mean", "median")
ALGORITHMS = ("lomo", "lasomo")
WEIGHT_SCHEMES = ("equal", "perm_based")
NA_ACTIONS = ("drop", "worst", "average")
VALIDATION_POLICIES = ("error", "skip")
OUTPUT_FORMATS = ("csv", "json")

DEFAULT_MIN_LOG_SCORE = -10.0
DEFAULT_GRID_SIZE = 4095
DEFAULT_LASOMO_CAP = 16
WORKERS_ENV_VAR = "ENSEMBLE_IMPORTANCE_WORKERS"


def _check_choice(name: str, value: str, choices: tuple[str, ...]) -> None:
    if value not in choices:
        raise ValueError(f"{name} must be one of {choices}, got {value!r}")


@dataclass(frozen=True)
class EnsembleSpec:
    """How component forecasts are combined into one ensemble forecast.

    ``agg_fun`` applies to ``simple_ensemble`` only; ``grid_size`` is the
    inverse-CDF evaluation grid used to pool quantile forecasts under
    ``linear_pool``.
    """

    method: str = "simple_ensemble"
    agg_fun: str = "mean"
    grid_size: int = DEFAULT_GRID_SIZE

    def __post_init__(self) -> None:
        _check_choice("method", self.method, ENSEMBLE_METHODS)
        _check_choice("agg_fun", self.agg_fun, AGG_FUNS)
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")


@dataclass(frozen=True)
class RunConfig:
    """All knobs for one importance run.

    Defaults follow the package conventions: simple mean ensemble, the
    leave-one-model-out algorithm, equal subset weights, a log-score floor
    of -10, NA scores dropped, and mean aggregation.
    """

    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    algorithm: str = "lomo"
    subset_wt: str = "equal"
    min_log_score: float = DEFAULT_MIN_LOG_SCORE
    na_action: str = "drop"
    agg_fun: str = "mean"
    workers: int = 1
    validation_policy: str = "error"
    output_format: str = "csv"
    seed: int | None = None
    lasomo_cap: int = DEFAULT_LASOMO_CAP

    def __post_init__(self) -> None:
        _check_choice("algorithm", self.algorithm, ALGORITHMS)
        _check_choice("subset_wt", self.subset_wt, WEIGHT_SCHEMES)
        _check_choice("na_action", self.na_action, NA_ACTIONS)
        _check_choice("validation_policy", self.validation_policy, VALIDATION_POLICIES)
        _check_choice("output_format", self.output_format, OUTPUT_FORMATS)
        if self.min_log_score > 0:
            raise ValueError("min_log_score must be non-positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.lasomo_cap < 2:
            raise ValueError("lasomo_cap must be >= 2")
