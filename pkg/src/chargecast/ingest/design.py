"""Fixed-effect design matrix, temperature splines, and the temporal split.

Column order is part of the file contract: intercept, Rapid dummy, public
dummy, free dummy, six day-of-week dummies (Friday is the reference), three
temperature-spline columns, wind, humidity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np
import pandas as pd
from scipy.interpolate import BSpline
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ..errors import UserInputError

FIXED_EFFECT_COLUMNS = (
    "intercept",
    "rapid",
    "public_access",
    "free_charging",
    "dow_monday",
    "dow_tuesday",
    "dow_wednesday",
    "dow_thursday",
    "dow_saturday",
    "dow_sunday",
    "temp_spline_1",
    "temp_spline_2",
    "temp_spline_3",
    "wind_ms",
    "humidity_pct",
)

_DOW_COLUMN = {
    "Monday": "dow_monday",
    "Tuesday": "dow_tuesday",
    "Wednesday": "dow_wednesday",
    "Thursday": "dow_thursday",
    "Saturday": "dow_saturday",
    "Sunday": "dow_sunday",
}


class TemperatureSpline(BaseEstimator, TransformerMixin):
    """Natural cubic spline basis with interior knots at training quantiles.

    For ``df`` columns the interior knots sit at the k/df quantiles of the
    training values (33.3%/66.7% for the default df=3) and the boundary knots
    at the training min/max. Values outside the training range are clamped to
    the boundary knots before evaluation, so extrapolation is constant.
    """

    def __init__(self, df: int = 3):
        self.df = df

    def fit(self, values, y=None):
        values = np.asarray(values, dtype=float).ravel()
        if values.size < 2:
            raise UserInputError("need at least two training temperatures")
        lo, hi = float(values.min()), float(values.max())
        if hi <= lo:
            raise UserInputError("degenerate spline basis: constant temperature series")
        probs = np.arange(1, self.df) / self.df
        interior = np.quantile(values, probs)
        self.boundary_knots_ = (lo, hi)
        self.interior_knots_ = np.asarray(interior, dtype=float)
        self._augmented = np.concatenate(
            [[lo] * 4, self.interior_knots_, [hi] * 4]
        )
        # null space of the second-derivative-at-boundary constraints,
        # computed on the basis with its leading (intercept-bearing) column
        # removed
        n_basis = len(self._augmented) - 4
        const = np.empty((2, n_basis - 1))
        for j in range(1, n_basis):
            coeff = np.zeros(n_basis)
            coeff[j] = 1.0
            d2 = BSpline(self._augmented, coeff, 3).derivative(2)
            const[0, j - 1] = d2(lo)
            const[1, j - 1] = d2(hi)
        q_full, _ = np.linalg.qr(const.T, mode="complete")
        self._null_projector = q_full[:, 2:]
        if self._null_projector.shape[1] != self.df:
            raise UserInputError(
                f"spline basis dimension mismatch (expected {self.df})"
            )
        return self

    def transform(self, values) -> np.ndarray:
        if not hasattr(self, "boundary_knots_"):
            raise NotFittedError("TemperatureSpline is not fitted")
        values = np.asarray(values, dtype=float).ravel()
        lo, hi = self.boundary_knots_
        clamped = np.clip(values, lo, hi)
        design = BSpline.design_matrix(clamped, self._augmented, 3).toarray()
        return design[:, 1:] @ self._null_projector


def spline_basis(values, df: int = 3) -> np.ndarray:
    """Fit-and-transform convenience over ``TemperatureSpline``."""
    return TemperatureSpline(df=df).fit(values).transform(values)


@dataclass
class ModelFrame:
    """Response, design matrix, and index maps linking rows to units and days."""

    y: np.ndarray  # (n,) integer counts
    X: np.ndarray  # (n, K)
    cpid_index: np.ndarray  # (n,) -> position in cpids
    day_index: np.ndarray  # (n,) -> position in days
    column_names: tuple[str, ...]
    cpids: tuple[str, ...]
    days: tuple[date, ...]

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]

    @property
    def n_days(self) -> int:
        return len(self.days)

    @property
    def n_stations(self) -> int:
        return len(self.cpids)

    def row_days(self) -> list[date]:
        return [self.days[i] for i in self.day_index]

    def to_dataframe(self) -> pd.DataFrame:
        data = {
            "cpid": [self.cpids[i] for i in self.cpid_index],
            "day": [self.days[i] for i in self.day_index],
            "y": self.y,
        }
        for k, name in enumerate(self.column_names):
            data[name] = self.X[:, k]
        return pd.DataFrame(data)

    @classmethod
    def from_dataframe(cls, table: pd.DataFrame) -> "ModelFrame":
        for col in ("cpid", "day", "y"):
            if col not in table.columns:
                raise UserInputError(f"frame table missing column {col!r}")
        columns = tuple(c for c in table.columns if c not in ("cpid", "day", "y"))
        days = tuple(sorted(pd.to_datetime(table["day"]).dt.date.unique()))
        cpids = tuple(sorted(table["cpid"].astype(str).unique()))
        day_pos = {d: i for i, d in enumerate(days)}
        cpid_pos = {c: i for i, c in enumerate(cpids)}
        row_days = pd.to_datetime(table["day"]).dt.date
        return cls(
            y=table["y"].to_numpy(dtype=np.int64),
            X=table.loc[:, list(columns)].to_numpy(dtype=float),
            cpid_index=np.array([cpid_pos[c] for c in table["cpid"].astype(str)]),
            day_index=np.array([day_pos[d] for d in row_days]),
            column_names=columns,
            cpids=cpids,
            days=days,
        )


def validate_frame(frame: ModelFrame) -> None:
    """Design-matrix sanity: no all-zero column, day dummies at most one-hot."""
    zero_cols = [
        name
        for k, name in enumerate(frame.column_names)
        if not np.any(frame.X[:, k] != 0.0)
    ]
    if zero_cols:
        raise UserInputError(f"design matrix has all-zero column(s): {zero_cols}")
    dow_cols = [k for k, c in enumerate(frame.column_names) if c.startswith("dow_")]
    if dow_cols:
        sums = frame.X[:, dow_cols].sum(axis=1)
        if np.any((sums != 0.0) & (sums != 1.0)):
            raise UserInputError("day-of-week dummies must sum to 0 or 1 per row")


def build_frame(
    panel: pd.DataFrame,
    weather: pd.DataFrame,
    spline_training_cutoff: date | None = None,
) -> ModelFrame:
    """Join weather onto the panel and emit the fixed-effect design matrix.

    Spline knots come from the distinct-day temperatures strictly before
    ``spline_training_cutoff`` (all days when None), so a later temporal split
    at that date leaks no test information into the basis.
    """
    days = sorted(pd.unique(panel["day"]))
    weather_by_day = weather.set_index("date")
    missing = [str(d) for d in days if d not in weather_by_day.index]
    if missing:
        raise UserInputError(f"weather file missing day(s): {missing}")

    cpids = sorted(panel["cpid"].astype(str).unique())
    day_pos = {d: i for i, d in enumerate(days)}
    cpid_pos = {c: i for i, c in enumerate(cpids)}

    train_days = [
        d for d in days if spline_training_cutoff is None or d < spline_training_cutoff
    ]
    if not train_days:
        raise UserInputError("no training days before the spline cutoff")
    spline = TemperatureSpline(df=3).fit(
        weather_by_day.loc[train_days, "temp_c"].to_numpy(dtype=float)
    )

    n = len(panel)
    X = np.zeros((n, len(FIXED_EFFECT_COLUMNS)))
    col = {name: k for k, name in enumerate(FIXED_EFFECT_COLUMNS)}
    X[:, col["intercept"]] = 1.0
    X[:, col["rapid"]] = (panel["connector_class"] == "Rapid").to_numpy(dtype=float)
    X[:, col["public_access"]] = panel["is_public_access"].to_numpy(dtype=float)
    X[:, col["free_charging"]] = panel["is_free"].to_numpy(dtype=float)
    for dow, name in _DOW_COLUMN.items():
        X[:, col[name]] = (panel["day_of_week"] == dow).to_numpy(dtype=float)

    row_days = panel["day"].to_numpy()
    temps = weather_by_day.loc[row_days, "temp_c"].to_numpy(dtype=float)
    basis = spline.transform(temps)
    for j in range(3):
        X[:, col[f"temp_spline_{j + 1}"]] = basis[:, j]
    X[:, col["wind_ms"]] = weather_by_day.loc[row_days, "wind_ms"].to_numpy(dtype=float)
    X[:, col["humidity_pct"]] = weather_by_day.loc[row_days, "humidity_pct"].to_numpy(
        dtype=float
    )

    frame = ModelFrame(
        y=panel["y"].to_numpy(dtype=np.int64),
        X=X,
        cpid_index=np.array([cpid_pos[str(c)] for c in panel["cpid"]]),
        day_index=np.array([day_pos[d] for d in panel["day"]]),
        column_names=FIXED_EFFECT_COLUMNS,
        cpids=tuple(cpids),
        days=tuple(days),
    )
    validate_frame(frame)
    return frame


def _subset_frame(frame: ModelFrame, mask: np.ndarray) -> ModelFrame:
    day_values = np.array(frame.row_days(), dtype=object)[mask]
    days = tuple(sorted(set(day_values)))
    day_pos = {d: i for i, d in enumerate(days)}
    return ModelFrame(
        y=frame.y[mask],
        X=frame.X[mask],
        cpid_index=frame.cpid_index[mask],
        day_index=np.array([day_pos[d] for d in day_values]),
        column_names=frame.column_names,
        cpids=frame.cpids,
        days=days,
    )


def temporal_split(frame: ModelFrame, split_date: date) -> tuple[ModelFrame, ModelFrame]:
    """Partition rows into train (day < split_date) and test (the rest).

    The boundary date itself lands in the test side. Each side is re-indexed
    over its own distinct days; the station list is shared.
    """
    row_days = np.array(frame.row_days(), dtype=object)
    train_mask = np.array([d < split_date for d in row_days])
    if not train_mask.any() or train_mask.all():
        raise UserInputError(
            f"split date {split_date} leaves an empty train or test side"
        )
    return _subset_frame(frame, train_mask), _subset_frame(frame, ~train_mask)
