"""Record types and CSV loaders for raw session logs and station metadata."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path

import pandas as pd

from ..errors import UserInputError

SESSION_COLUMN_MAP = {
    "cpid": "CPID",
    "start_date": "Start Date",
    "start_time": "Start Time",
    "end_date": "End Date",
    "end_time": "End Time",
    "duration_min": "Duration",
    "energy_kwh": "Total kWh",
    "cost": "Cost",
    "site": "Site",
    "local_authority": "Local Authority",
}

STATION_COLUMNS = (
    "cpid",
    "lon",
    "lat",
    "connector_class",
    "is_public_access",
    "tariff_start_date",
    "neighbourhood",
)

WEATHER_COLUMNS = ("date", "temp_c", "wind_ms", "humidity_pct")

CONNECTOR_CLASSES = ("AC", "Rapid")


@dataclass
class RawSessionRecord:
    """One raw charging-session log row, values still unvalidated."""

    cpid: str
    start_raw: str
    end_raw: str
    duration_min: float | None
    energy_kwh: float | None
    cost: float | None
    local_authority: str
    source_file: str


@dataclass(frozen=True)
class CleanSession:
    """A session that passed every curation rule."""

    cpid: str
    start: datetime
    day: date
    energy_kwh: float
    cost: float


def _parse_number(text: str | None) -> float | None:
    """Parse a numeric field; tolerates currency symbols, commas, and H:MM:SS
    durations (converted to minutes). Missing or malformed values become None."""
    if text is None:
        return None
    cleaned = text.strip().replace("£", "").replace(",", "")
    if not cleaned:
        return None
    if ":" in cleaned:
        parts = cleaned.split(":")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            return None
        if len(nums) == 2:
            return nums[0] * 60.0 + nums[1]
        if len(nums) == 3:
            return nums[0] * 60.0 + nums[1] + nums[2] / 60.0
        return None
    try:
        value = float(cleaned)
    except ValueError:
        return None
    return value


def load_sessions_csv(
    path: Path | str, column_map: dict | None = None
) -> list[RawSessionRecord]:
    """Read one monthly session log into raw records.

    ``column_map`` overrides the default header names (keys as in
    ``SESSION_COLUMN_MAP``).
    """
    mapping = dict(SESSION_COLUMN_MAP)
    if column_map:
        mapping.update(column_map)
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8-sig", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise UserInputError(f"{path}: empty sessions file")
        missing = [mapping["cpid"]] if mapping["cpid"] not in reader.fieldnames else []
        if missing:
            raise UserInputError(f"{path}: missing required column(s) {missing}")
        for row in reader:
            start_raw = " ".join(
                part
                for part in (
                    (row.get(mapping["start_date"]) or "").strip(),
                    (row.get(mapping["start_time"]) or "").strip(),
                )
                if part
            )
            end_raw = " ".join(
                part
                for part in (
                    (row.get(mapping["end_date"]) or "").strip(),
                    (row.get(mapping["end_time"]) or "").strip(),
                )
                if part
            )
            records.append(
                RawSessionRecord(
                    cpid=(row.get(mapping["cpid"]) or "").strip(),
                    start_raw=start_raw,
                    end_raw=end_raw,
                    duration_min=_parse_number(row.get(mapping["duration_min"])),
                    energy_kwh=_parse_number(row.get(mapping["energy_kwh"])),
                    cost=_parse_number(row.get(mapping["cost"])),
                    local_authority=(row.get(mapping["local_authority"]) or "").strip(),
                    source_file=path.name,
                )
            )
    return records


def load_stations_csv(path: Path | str) -> pd.DataFrame:
    """Read station metadata; ``tariff_start_date`` empty means the station
    never transitioned to paid access within the data window (always free);
    a date before the window start encodes an always-paid station."""
    table = pd.read_csv(path, dtype={"cpid": str})
    missing = [c for c in STATION_COLUMNS if c not in table.columns]
    if missing:
        raise UserInputError(f"stations file missing column(s) {missing}")
    table["cpid"] = table["cpid"].str.strip()
    if table["cpid"].duplicated().any():
        dupes = table.loc[table["cpid"].duplicated(), "cpid"].tolist()
        raise UserInputError(f"duplicate station rows for CPIDs {dupes}")
    bad = ~table["connector_class"].isin(CONNECTOR_CLASSES)
    if bad.any():
        raise UserInputError(
            f"connector_class must be one of {CONNECTOR_CLASSES}; "
            f"got {sorted(table.loc[bad, 'connector_class'].unique())}"
        )
    table["is_public_access"] = table["is_public_access"].astype(bool)
    table["tariff_start_date"] = pd.to_datetime(
        table["tariff_start_date"], format="%Y-%m-%d", errors="coerce"
    ).dt.date
    return table


def load_weather_csv(path: Path | str) -> pd.DataFrame:
    """Read the per-day weather covariate table (ISO dates)."""
    table = pd.read_csv(path)
    missing = [c for c in WEATHER_COLUMNS if c not in table.columns]
    if missing:
        raise UserInputError(f"weather file missing column(s) {missing}")
    table["date"] = pd.to_datetime(table["date"], format="%Y-%m-%d").dt.date
    if table["date"].duplicated().any():
        raise UserInputError("weather file has duplicate dates")
    for col in ("temp_c", "wind_ms", "humidity_pct"):
        table[col] = pd.to_numeric(table[col], errors="raise")
    return table.sort_values("date").reset_index(drop=True)
