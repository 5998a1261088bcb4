"""Forecast-accuracy metrics, station-level model comparison, and EDA summaries.

MAPE is computed over rows with a positive observed count only; rows with
``y == 0`` are excluded and their number is reported alongside the metric
tables rather than silently folded in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import UserInputError
from .validation import as_float_array, check_same_length

METRIC_NAMES = ("mae", "rmse", "mape")


def mae(y_true, y_pred) -> float:
    """Mean absolute error."""
    yt = as_float_array(y_true, "y_true", ndim=1)
    yp = as_float_array(y_pred, "y_pred", ndim=1)
    check_same_length(yt, yp, "y_true", "y_pred")
    if yt.size == 0:
        raise UserInputError("mae requires at least one observation")
    return float(np.mean(np.abs(yt - yp)))


def rmse(y_true, y_pred) -> float:
    """Root mean squared error."""
    yt = as_float_array(y_true, "y_true", ndim=1)
    yp = as_float_array(y_pred, "y_pred", ndim=1)
    check_same_length(yt, yp, "y_true", "y_pred")
    if yt.size == 0:
        raise UserInputError("rmse requires at least one observation")
    return float(np.sqrt(np.mean((yt - yp) ** 2)))


def mape(y_true, y_pred) -> float:
    """Mean absolute percentage error over rows with ``y_true > 0``, in percent."""
    value, _ = mape_with_skips(y_true, y_pred)
    return value


def mape_with_skips(y_true, y_pred) -> tuple[float, int]:
    """MAPE plus the number of zero-count rows excluded from it."""
    yt = as_float_array(y_true, "y_true", ndim=1)
    yp = as_float_array(y_pred, "y_pred", ndim=1)
    check_same_length(yt, yp, "y_true", "y_pred")
    positive = yt > 0
    skipped = int(np.sum(~positive))
    if not np.any(positive):
        raise UserInputError("mape undefined: no rows with positive observed count")
    value = float(100.0 * np.mean(np.abs(yt[positive] - yp[positive]) / yt[positive]))
    return value, skipped


@dataclass(frozen=True)
class DominanceResult:
    """Station-level win counts of model A against model B for one metric."""

    metric: str
    wins_a: int
    wins_b: int
    ties: int

    @property
    def n_stations(self) -> int:
        return self.wins_a + self.wins_b + self.ties

    @property
    def wins_a_pct(self) -> float:
        return round(100.0 * self.wins_a / self.n_stations, 1)

    @property
    def wins_b_pct(self) -> float:
        return round(100.0 * self.wins_b / self.n_stations, 1)


def dominance(errors_a: dict[str, float], errors_b: dict[str, float], metric: str = "") -> DominanceResult:
    """Count stations where A's error is strictly lower than B's.

    Both inputs map station id -> error value and must cover the same
    station set. Equal errors count as ties.
    """
    if set(errors_a) != set(errors_b):
        raise UserInputError("dominance requires identical station sets for both models")
    if not errors_a:
        raise UserInputError("dominance requires at least one station")
    wins_a = wins_b = ties = 0
    for station in errors_a:
        a, b = errors_a[station], errors_b[station]
        if a < b:
            wins_a += 1
        elif b < a:
            wins_b += 1
        else:
            ties += 1
    return DominanceResult(metric=metric, wins_a=wins_a, wins_b=wins_b, ties=ties)


def bootstrap_ci(
    values, n_boot: int = 1000, level: float = 0.95, seed: int = 0
) -> tuple[float, float, float]:
    """Percentile bootstrap confidence interval for the mean.

    Returns ``(mean, lo, hi)``. Deterministic for a fixed seed.
    """
    vals = as_float_array(values, "values", ndim=1)
    if vals.size == 0:
        raise UserInputError("bootstrap_ci requires a nonempty sample")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, vals.size, size=(n_boot, vals.size))
    means = vals[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(vals.mean()), float(lo), float(hi)


def metric_table(predictions: pd.DataFrame, label: str) -> tuple[pd.DataFrame, dict]:
    """Per-station and pooled metric table for one model.

    ``predictions`` needs columns ``cpid``, ``y_true``, ``y_pred``. Stations
    whose test rows are all zero get ``NaN`` MAPE (excluded rows are counted).
    Returns the table plus a pooled-summary dict.
    """
    for col in ("cpid", "y_true", "y_pred"):
        if col not in predictions.columns:
            raise UserInputError(f"predictions table missing column {col!r}")
    rows = []
    for cpid, group in predictions.groupby("cpid", sort=True):
        yt = group["y_true"].to_numpy(dtype=float)
        yp = group["y_pred"].to_numpy(dtype=float)
        try:
            mape_val, skipped = mape_with_skips(yt, yp)
        except UserInputError:
            mape_val, skipped = float("nan"), len(yt)
        rows.append(
            {
                "cpid": str(cpid),
                "model": label,
                "n_rows": len(yt),
                "mae": mae(yt, yp),
                "rmse": rmse(yt, yp),
                "mape": mape_val,
                "mape_skipped": skipped,
            }
        )
    table = pd.DataFrame(rows)
    yt = predictions["y_true"].to_numpy(dtype=float)
    yp = predictions["y_pred"].to_numpy(dtype=float)
    try:
        pooled_mape, pooled_skipped = mape_with_skips(yt, yp)
    except UserInputError:
        pooled_mape, pooled_skipped = float("nan"), len(yt)
    pooled = {
        "model": label,
        "n_rows": int(len(yt)),
        "mae": mae(yt, yp),
        "rmse": rmse(yt, yp),
        "mape": pooled_mape,
        "mape_skipped": int(pooled_skipped),
    }
    return table, pooled


def weekday_summary(
    panel: pd.DataFrame, n_boot: int = 1000, seed: int = 0
) -> pd.DataFrame:
    """Mean daily session volume per weekday with bootstrap confidence bands.

    Sessions are first totalled per calendar day across all stations, then the
    daily totals are grouped by weekday and the mean of each group is
    bootstrapped.
    """
    if panel.empty:
        raise UserInputError("weekday_summary requires a nonempty panel")
    daily = panel.groupby("day", sort=True)["y"].sum()
    days = pd.to_datetime(pd.Series(daily.index))
    weekday = days.dt.day_name().to_numpy()
    order = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]
    rows = []
    for name in order:
        totals = daily.to_numpy(dtype=float)[weekday == name]
        if totals.size == 0:
            continue
        mean, lo, hi = bootstrap_ci(totals, n_boot=n_boot, seed=seed)
        rows.append(
            {"weekday": name, "n_days": totals.size, "mean_sessions": mean, "ci_lo": lo, "ci_hi": hi}
        )
    return pd.DataFrame(rows)
