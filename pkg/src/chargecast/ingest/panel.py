"""Daily count panel: aggregation of clean sessions with zero-filling.

The default ``active-window`` policy fills a zero-count row for every day
between a station's first and last observed session (inclusive); the
``full-range`` policy fills the whole station-by-day rectangle over the
global day range, and ``none`` keeps only observed days. A station's
``is_free`` covariate flips to False on its tariff start date.
"""

from __future__ import annotations

import logging
from datetime import date, timedelta

import numpy as np
import pandas as pd

from ..errors import UserInputError
from .records import CleanSession

logger = logging.getLogger(__name__)

ZERO_FILL_POLICIES = ("active-window", "full-range", "none")

PANEL_COLUMNS = (
    "cpid",
    "day",
    "y",
    "connector_class",
    "is_public_access",
    "is_free",
    "day_of_week",
)


def _date_range(first: date, last: date) -> list[date]:
    return [first + timedelta(days=i) for i in range((last - first).days + 1)]


def aggregate_daily(
    sessions: list[CleanSession],
    stations: pd.DataFrame,
    zero_fill: str = "active-window",
) -> pd.DataFrame:
    """Count sessions per (cpid, day) and zero-fill per the chosen policy.

    Sessions whose CPID has no station metadata are dropped (count recorded
    in ``result.attrs['unmatched_sessions']``). Total counts over the panel
    equal the number of matched sessions.
    """
    if zero_fill not in ZERO_FILL_POLICIES:
        raise UserInputError(
            f"unknown zero-fill policy {zero_fill!r}; expected one of {ZERO_FILL_POLICIES}"
        )
    station_table = stations.set_index("cpid")
    known = set(station_table.index)

    counts: dict[tuple[str, date], int] = {}
    unmatched: dict[str, int] = {}
    for s in sessions:
        if s.cpid not in known:
            unmatched[s.cpid] = unmatched.get(s.cpid, 0) + 1
            continue
        key = (s.cpid, s.day)
        counts[key] = counts.get(key, 0) + 1
    if unmatched:
        logger.warning(
            "dropped %d session(s) without station metadata: %s",
            sum(unmatched.values()),
            sorted(unmatched),
        )
    if not counts:
        raise UserInputError("no sessions left after matching station metadata")

    observed_days: dict[str, list[date]] = {}
    for cpid, day in counts:
        observed_days.setdefault(cpid, []).append(day)
    global_first = min(day for _, day in counts)
    global_last = max(day for _, day in counts)

    rows = []
    for cpid in sorted(observed_days):
        meta = station_table.loc[cpid]
        if zero_fill == "active-window":
            days = _date_range(min(observed_days[cpid]), max(observed_days[cpid]))
        elif zero_fill == "full-range":
            days = _date_range(global_first, global_last)
        else:
            days = sorted(observed_days[cpid])
        tariff_start = meta["tariff_start_date"]
        for day in days:
            is_free = True if pd.isna(tariff_start) else day < tariff_start
            rows.append(
                {
                    "cpid": cpid,
                    "day": day,
                    "y": counts.get((cpid, day), 0),
                    "connector_class": meta["connector_class"],
                    "is_public_access": bool(meta["is_public_access"]),
                    "is_free": bool(is_free),
                    "day_of_week": day.strftime("%A"),
                }
            )
    panel = pd.DataFrame(rows, columns=list(PANEL_COLUMNS))
    panel.attrs["unmatched_sessions"] = dict(sorted(unmatched.items()))
    panel.attrs["zero_fill"] = zero_fill
    validate_panel(panel)
    return panel


def validate_panel(panel: pd.DataFrame) -> None:
    """Enforce the panel contract: unique (cpid, day) keys, nonnegative counts."""
    missing = [c for c in PANEL_COLUMNS if c not in panel.columns]
    if missing:
        raise UserInputError(f"panel missing column(s) {missing}")
    if panel.duplicated(subset=["cpid", "day"]).any():
        raise UserInputError("panel has duplicate (cpid, day) rows")
    y = panel["y"].to_numpy()
    if np.any(y < 0) or not np.all(np.equal(np.mod(y, 1), 0)):
        raise UserInputError("panel counts must be nonnegative integers")
