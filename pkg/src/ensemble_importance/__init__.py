"""Per-model contribution scores for multi-model ensemble forecasts.

Given hubverse-style forecast and oracle tables, compute how much each
component model adds to (or subtracts from) the accuracy of the ensemble,
per prediction task and in aggregate.
"""

from .config import EnsembleSpec, RunConfig
from .data_model import (
    ForecastTable,
    OracleTable,
    TaskBundle,
    ValidationReport,
    join_oracle,
    parse_forecast_table,
    parse_oracle_table,
    serialize_forecast_table,
    standardize_reference_date,
    validate,
)
from .ensemble import (
    Forecast,
    interp_inverse_cdf,
    linear_pool,
    pmf_forecast,
    point_forecast,
    quantile_forecast,
    simple_ensemble,
)
from .errors import (
    DataValidationError,
    EnsembleImportanceError,
    ModelCapError,
    TaskComputationError,
)
from .importance import (
    EvalCounter,
    ImportanceRow,
    ImportanceTable,
    lasomo_task,
    lomo_task,
    model_importance,
    read_importance_table,
    subset_weight,
    write_importance_csv,
    write_importance_json,
)
from .scoring import score, wis
from .summarize import (
    AggregateTable,
    SummaryReport,
    aggregate,
    impute,
    summarize,
    summary_from_dict,
    summary_to_dict,
)

__all__ = [
    "AggregateTable",
    "DataValidationError",
    "EnsembleImportanceError",
    "EnsembleSpec",
    "EvalCounter",
    "Forecast",
    "ForecastTable",
    "ImportanceRow",
    "ImportanceTable",
    "ModelCapError",
    "OracleTable",
    "RunConfig",
    "SummaryReport",
    "TaskBundle",
    "TaskComputationError",
    "ValidationReport",
    "aggregate",
    "impute",
    "interp_inverse_cdf",
    "join_oracle",
    "lasomo_task",
    "linear_pool",
    "lomo_task",
    "model_importance",
    "parse_forecast_table",
    "parse_oracle_table",
    "pmf_forecast",
    "point_forecast",
    "quantile_forecast",
    "read_importance_table",
    "score",
    "serialize_forecast_table",
    "simple_ensemble",
    "standardize_reference_date",
    "subset_weight",
    "summarize",
    "summary_from_dict",
    "summary_to_dict",
    "validate",
    "wis",
    "write_importance_csv",
    "write_importance_json",
]
