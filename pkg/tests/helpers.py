"""Shared builders and independent oracles used across the test modules."""

from __future__ import annotations

import io
import itertools
import math
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from ensemble_importance import cli
from ensemble_importance.data_model import TaskBundle
from ensemble_importance.ensemble import Forecast

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
EXAMPLE_FORECASTS = DATA_DIR / "example_forecasts.csv"
EXAMPLE_ORACLE = DATA_DIR / "example_oracle.csv"


def run_cli(argv: Sequence[str]) -> tuple[int, str, str]:
    """Invoke the CLI in-process; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        try:
            code = cli.main(list(argv))
        except SystemExit as exc:  # argparse usage errors
            code = exc.code if isinstance(exc.code, int) else 2
    return code, out.getvalue(), err.getvalue()


def point_bundle(
    values: Mapping[str, float], truth: float, output_type: str = "median"
) -> TaskBundle:
    """One-task bundle of point forecasts, keyed by model id."""
    return TaskBundle(
        key=("2022-11-19", "t0"),
        task_columns=("reference_date", "task"),
        output_type=output_type,
        forecasts={
            m: Forecast(output_type, ("",), (float(v),)) for m, v in values.items()
        },
        truth=float(truth),
    )


def _frac_mean(values: Sequence[Fraction]) -> Fraction:
    return sum(values, Fraction(0)) / len(values)


def brute_force_lasomo(
    values: Mapping[str, int], truth: int, scheme: str
) -> dict[str, Fraction]:
    """Naive exact-arithmetic subset sweep for mean-ensemble point tasks.

    Enumerates subsets with itertools.combinations and exact Fractions,
    fully independent of the bitmask implementation under test.
    """
    models = sorted(values)
    n = len(models)
    y = Fraction(truth)
    result: dict[str, Fraction] = {}
    for target in models:
        others = [m for m in models if m != target]
        total = Fraction(0)
        for size in range(1, n):
            for combo in itertools.combinations(others, size):
                if scheme == "equal":
                    weight = Fraction(1, 2 ** (n - 1) - 1)
                else:
                    weight = Fraction(1, (n - 1) * math.comb(n - 1, size))
                with_target = _frac_mean(
                    [Fraction(values[m]) for m in (*combo, target)]
                )
                without = _frac_mean([Fraction(values[m]) for m in combo])
                total += weight * (abs(without - y) - abs(with_target - y))
        result[target] = total
    return result


def brute_force_lomo(values: Mapping[str, int], truth: int) -> dict[str, Fraction]:
    """Exact LOMO for mean-ensemble point tasks; equals the full-coalition
    LASOMO summand psi(A) - psi(A minus i)."""
    models = sorted(values)
    y = Fraction(truth)
    psi_full = -abs(_frac_mean([Fraction(values[m]) for m in models]) - y)
    result = {}
    for target in models:
        rest = [Fraction(values[m]) for m in models if m != target]
        result[target] = psi_full + abs(_frac_mean(rest) - y)
    return result


def interval_score_wis(
    levels: Sequence[float], values: Sequence[float], y: float
) -> float:
    """WIS via the central-interval decomposition, for symmetric level sets.

    Each symmetric pair (tau, 1-tau) contributes alpha * IS_alpha with
    alpha = 2*tau; an unpaired 0.5 level contributes |y - median|; the sum
    is divided by the number of levels. Independent of the pinball form.
    """
    k = len(levels)
    total = 0.0
    i, j = 0, k - 1
    while i < j:
        alpha = 2.0 * levels[i]
        if abs((1.0 - levels[j]) - levels[i]) > 1e-12:
            raise ValueError("level set is not symmetric")
        lower, upper = values[i], values[j]
        interval = (upper - lower)
        interval += (2.0 / alpha) * max(0.0, lower - y)
        interval += (2.0 / alpha) * max(0.0, y - upper)
        total += alpha * interval
        i += 1
        j -= 1
    if i == j:
        if abs(levels[i] - 0.5) > 1e-12:
            raise ValueError("unpaired level must be 0.5")
        total += abs(y - values[i])
    return total / k


def forecast_csv(rows: Sequence[Mapping[str, str]], columns: Sequence[str]) -> str:
    """Small CSV builder for synthetic forecast tables."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(row.get(c, "") for c in columns))
    return "\n".join(lines) + "\n"
