"""Timestamp parsing with per-file day-first / month-first disambiguation.

Raw logs mix DD/MM/YYYY and MM/DD/YYYY. A file is assumed internally
consistent, so the ordering is fixed per file by a majority vote over its
unambiguous rows: a first field above 12 votes day-first, a second field
above 12 votes month-first. Ties fall back to day-first (UK source data).
ISO dates (YYYY-MM-DD) are always unambiguous.
"""

from __future__ import annotations

import re
from datetime import datetime
from typing import Iterable, Literal

from ..errors import UserInputError

DatePolicy = Literal["day-first", "month-first"]

_DMY = re.compile(
    r"^\s*(\d{1,4})[/\-.](\d{1,2})[/\-.](\d{1,4})"
    r"(?:[ T](\d{1,2}):(\d{2})(?::(\d{2}))?)?\s*$"
)


def _split(raw: str):
    match = _DMY.match(raw)
    if match is None:
        raise ValueError(f"unparseable timestamp {raw!r}")
    a, b, c = int(match.group(1)), int(match.group(2)), int(match.group(3))
    hour = int(match.group(4) or 0)
    minute = int(match.group(5) or 0)
    second = int(match.group(6) or 0)
    return a, b, c, hour, minute, second


def classify_date_order(raw: str) -> DatePolicy | None:
    """Vote of a single row: a policy name if the row is unambiguous, else None.

    Rows that are invalid under both readings (or ISO-formatted) do not vote.
    """
    try:
        a, b, _, _, _, _ = _split(raw)
    except ValueError:
        return None
    if a > 999:  # ISO year-first: no vote needed
        return None
    day_first_ok = 1 <= b <= 12 and 1 <= a <= 31
    month_first_ok = 1 <= a <= 12 and 1 <= b <= 31
    if day_first_ok and not month_first_ok:
        return "day-first"
    if month_first_ok and not day_first_ok:
        return "month-first"
    if a > 12 and day_first_ok:
        return "day-first"
    if b > 12 and month_first_ok:
        return "month-first"
    return None


def resolve_date_policy(raw_values: Iterable[str]) -> DatePolicy:
    """Majority vote over a file's unambiguous rows; day-first wins ties.

    Raises when no row is unambiguous, since the file ordering would then be
    a pure guess and an explicit policy must be configured.
    """
    votes = {"day-first": 0, "month-first": 0}
    for raw in raw_values:
        vote = classify_date_order(raw)
        if vote is not None:
            votes[vote] += 1
    if votes["day-first"] == 0 and votes["month-first"] == 0:
        raise UserInputError(
            "no unambiguous dates in file; set an explicit date policy"
        )
    return "month-first" if votes["month-first"] > votes["day-first"] else "day-first"


def parse_timestamp(raw: str, policy: DatePolicy) -> datetime:
    """Parse one timestamp under a resolved ordering policy.

    Raises ValueError for strings with no valid calendar reading; callers
    route those to the curation report instead of failing the run.
    """
    if not raw or not raw.strip():
        raise ValueError("empty timestamp")
    a, b, c, hour, minute, second = _split(raw)
    if a > 999:  # ISO year-first
        year, month, day = a, b, c
    elif policy == "day-first":
        year, month, day = c, b, a
    elif policy == "month-first":
        year, month, day = c, a, b
    else:
        raise UserInputError(f"unknown date policy {policy!r}")
    try:
        return datetime(year, month, day, hour, minute, second)
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {raw!r}: {exc}") from exc
