"""Combine component forecasts for one prediction task into an ensemble.

Two methods are supported: ``simple_ensemble`` aggregates values per
output_type_id with mean or median (level-wise averaging for quantile
forecasts, i.e. Vincentization), and ``linear_pool`` builds the
equally-weighted mixture of the component predictive distributions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from statistics import fmean, median
from typing import Sequence

import numpy as np

from .config import DEFAULT_GRID_SIZE


def canonical_level(text: str) -> str:
    """Canonical decimal text for a quantile level ("0.250" -> "0.25")."""
    return repr(float(text))


@dataclass(frozen=True)
class Forecast:
    """One predictive distribution (or point prediction) for one task.

    ``ids`` and ``values`` are aligned: a single empty id for mean/median,
    canonical quantile-level text sorted ascending for quantile, and
    category labels sorted lexicographically for pmf.
    """

    output_type: str
    ids: tuple[str, ...]
    values: tuple[float, ...]

    @cached_property
    def levels(self) -> tuple[float, ...]:
        """Numeric quantile levels (quantile forecasts only)."""
        return tuple(float(t) for t in self.ids)


def point_forecast(output_type: str, value: float) -> Forecast:
    if output_type not in ("mean", "median"):
        raise ValueError(f"not a point output type: {output_type!r}")
    return Forecast(output_type, ("",), (float(value),))


def quantile_forecast(levels: Sequence[float], values: Sequence[float]) -> Forecast:
    pairs = sorted(zip((float(t) for t in levels), values))
    return Forecast(
        "quantile",
        tuple(canonical_level(repr(t)) for t, _ in pairs),
        tuple(float(v) for _, v in pairs),
    )


def pmf_forecast(categories: Sequence[str], probs: Sequence[float]) -> Forecast:
    pairs = sorted(zip(categories, probs))
    return Forecast("pmf", tuple(c for c, _ in pairs), tuple(float(p) for _, p in pairs))


def _mean(values: list[float]) -> float:
    # fsum keeps the mean invariant under component reordering; the
    # all-equal shortcut keeps ensembling identical forecasts exact.
    if values[0] == values[-1] and all(v == values[0] for v in values):
        return values[0]
    return fmean(values)


def _check_components(forecasts: Sequence[Forecast]) -> Forecast:
    if not forecasts:
        raise ValueError("cannot ensemble an empty list of forecasts")
    first = forecasts[0]
    for f in forecasts[1:]:
        if f.output_type != first.output_type:
            raise ValueError(
                f"mixed output types: {first.output_type!r} vs {f.output_type!r}"
            )
        if f.ids != first.ids:
            raise ValueError(
                f"component output_type_id sets differ: {first.ids} vs {f.ids}"
            )
    return first


def simple_ensemble(forecasts: Sequence[Forecast], agg_fun: str = "mean") -> Forecast:
    """Aggregate component values per output_type_id with mean or median."""
    first = _check_components(forecasts)
    if agg_fun not in ("mean", "median"):
        raise ValueError(f"agg_fun must be 'mean' or 'median', got {agg_fun!r}")
    agg = _mean if agg_fun == "mean" else median
    if len(forecasts) == 1:
        return first
    values = tuple(
        float(agg([f.values[j] for f in forecasts])) for j in range(len(first.ids))
    )
    return Forecast(first.output_type, first.ids, values)


def linear_pool(forecasts: Sequence[Forecast], grid_size: int = DEFAULT_GRID_SIZE) -> Forecast:
    """Equally-weighted linear opinion pool of the component forecasts.

    mean: average of component means. pmf: per-category average probability.
    quantile: quantiles of the mixture distribution, approximated by
    evaluating each component's piecewise-linear inverse CDF on a fixed
    probability grid of ``grid_size`` points, pooling all grid values, and
    reading empirical quantiles at the original levels. The median output
    type is not supported.
    """
    first = _check_components(forecasts)
    if first.output_type == "median":
        raise ValueError(
            "linear_pool does not support the median output type "
            "(only mean, quantile, or pmf)"
        )
    if first.output_type in ("mean", "pmf"):
        values = tuple(
            _mean([f.values[j] for f in forecasts]) for j in range(len(first.ids))
        )
        return Forecast(first.output_type, first.ids, values)
    # quantile: pool inverse-CDF evaluations from all components
    probs = (np.arange(grid_size) + 0.5) / grid_size
    pooled = np.concatenate([_inverse_cdf(f, probs) for f in forecasts])
    mixed = np.quantile(pooled, np.asarray(first.levels))
    return Forecast("quantile", first.ids, tuple(float(v) for v in mixed))


def _inverse_cdf(forecast: Forecast, probs: np.ndarray) -> np.ndarray:
    """Piecewise-linear inverse CDF through the quantile knots.

    Outside [tau_1, tau_K] the two outermost knots are extended linearly.
    """
    tau = np.asarray(forecast.levels)
    q = np.asarray(forecast.values)
    if tau.size < 2:
        raise ValueError("quantile interpolation needs at least 2 quantile points")
    out = np.interp(probs, tau, q)
    lo = probs < tau[0]
    if lo.any():
        slope = (q[1] - q[0]) / (tau[1] - tau[0])
        out[lo] = q[0] + slope * (probs[lo] - tau[0])
    hi = probs > tau[-1]
    if hi.any():
        slope = (q[-1] - q[-2]) / (tau[-1] - tau[-2])
        out[hi] = q[-1] + slope * (probs[hi] - tau[-1])
    return out


def interp_inverse_cdf(forecast: Forecast, p: float) -> float:
    """Evaluate a quantile forecast's piecewise-linear inverse CDF at p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be inside (0, 1), got {p}")
    return float(_inverse_cdf(forecast, np.asarray([p]))[0])
