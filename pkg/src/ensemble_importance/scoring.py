"""Positively oriented scoring rules, keyed to the forecast output type.

Higher is better everywhere: point and quantile forecasts score as negated
losses (-SE, -AE, -WIS) and pmf forecasts as the floored log probability of
the realized category. A perfect forecast scores 0 for the negated losses.
"""

from __future__ import annotations

import math
from typing import Sequence

from .config import DEFAULT_MIN_LOG_SCORE
from .ensemble import Forecast

TruthValue = float | str


def wis(levels: Sequence[float], values: Sequence[float], y: float) -> float:
    """Weighted interval score: mean over levels of twice the pinball loss.

    With a single level of 0.5 this reduces to the absolute error |q - y|.
    """
    if len(levels) != len(values):
        raise ValueError("levels and values must have equal length")
    if not levels:
        raise ValueError("need at least one quantile level")
    prev = 0.0
    for tau in levels:
        if not prev < tau < 1.0:
            raise ValueError("levels must be strictly increasing inside (0, 1)")
        prev = tau
    total = 0.0
    prev_q = -math.inf
    for tau, q in zip(levels, values):
        if q < prev_q:
            raise ValueError("quantile values must be non-decreasing in level")
        prev_q = q
        indicator = 1.0 if y <= q else 0.0
        total += 2.0 * (indicator - tau) * (q - y)
    return total / len(levels)


def score(
    forecast: Forecast,
    truth: TruthValue,
    min_log_score: float = DEFAULT_MIN_LOG_SCORE,
) -> float:
    """Score one forecast against the realized outcome.

    mean -> -(q - y)^2, median -> -|q - y|, quantile -> -WIS,
    pmf -> max(ln p(y), min_log_score).
    """
    if not forecast.values:
        raise ValueError("cannot score an empty forecast")
    if min_log_score > 0:
        raise ValueError("min_log_score must be non-positive")
    kind = forecast.output_type
    if kind == "mean":
        return -((forecast.values[0] - float(truth)) ** 2)
    if kind == "median":
        return -abs(forecast.values[0] - float(truth))
    if kind == "quantile":
        return -wis(forecast.levels, forecast.values, float(truth))
    if kind == "pmf":
        try:
            idx = forecast.ids.index(str(truth))
        except ValueError:
            raise ValueError(
                f"truth category {truth!r} is not among the forecast categories "
                f"{forecast.ids}"
            ) from None
        p = forecast.values[idx]
        if p <= 0.0:
            return min_log_score
        return max(math.log(p), min_log_score)
    raise ValueError(f"unsupported output type: {kind!r}")
