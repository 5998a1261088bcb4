#!/usr/bin/env python3
"""Regenerate the bundled 5-station / 60-day test fixture.

The fixture is a small synthetic charging network with the same structure as
the production inputs: two monthly session logs (one day-first, one
month-first, so the date-policy vote is exercised), station metadata with
mixed connector classes / access levels / tariff histories, a daily weather
table, and a run configuration. A handful of deliberately bad rows exercise
every curation rule.

Run from the repository root:  python3 scripts/generate_fixture.py
"""

from __future__ import annotations

import csv
from datetime import date, timedelta
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

FIRST_DAY = date(2024, 3, 1)
N_DAYS = 60
SPLIT = date(2024, 4, 18)
ANOMALY = (date(2024, 3, 10), date(2024, 3, 12))

STATIONS = [
    # cpid, lon, lat, connector, public, tariff_start ("" = never), neighbourhood
    ("10001", -4.2520, 55.8600, "AC", True, "2024-04-01", "Central"),
    ("10002", -4.2490, 55.8612, "AC", True, "", "Central"),
    ("10003", -4.2555, 55.8621, "Rapid", True, "2024-03-20", "West"),
    ("10004", -4.2575, 55.8585, "AC", False, "2023-01-01", "West"),
    ("10005", -4.2450, 55.8575, "AC", True, "", "East"),
]

DOW_EFFECT = {
    "Monday": -0.05,
    "Tuesday": -0.05,
    "Wednesday": -0.02,
    "Thursday": -0.03,
    "Friday": 0.0,
    "Saturday": -0.12,
    "Sunday": -0.25,
}


def day_list() -> list[date]:
    return [FIRST_DAY + timedelta(days=i) for i in range(N_DAYS)]


def weather_rows(rng: np.random.Generator) -> list[dict]:
    rows = []
    for i, day in enumerate(day_list()):
        temp = 8.0 + 4.0 * np.sin(2 * np.pi * i / 60.0) + rng.normal(0, 1.2)
        rows.append(
            {
                "date": day.isoformat(),
                "temp_c": round(float(temp), 2),
                "wind_ms": round(float(rng.uniform(2.0, 8.0)), 2),
                "humidity_pct": round(float(rng.uniform(60.0, 90.0)), 1),
            }
        )
    return rows


def session_rate(station, day: date, temp: float) -> float:
    _, _, _, connector, public, tariff_start, _ = station
    free = tariff_start == "" or day < date.fromisoformat(tariff_start)
    eta = 0.30
    eta += 0.90 if connector == "Rapid" else 0.0
    eta += 0.40 if public else 0.0
    eta += 0.20 if free else 0.0
    eta += DOW_EFFECT[day.strftime("%A")]
    eta += -0.015 * (temp - 8.0)
    return float(np.exp(eta))


def format_date(day: date, month_first: bool) -> str:
    if month_first:
        return f"{day.month:02d}/{day.day:02d}/{day.year}"
    return f"{day.day:02d}/{day.month:02d}/{day.year}"


def make_sessions(rng: np.random.Generator, weather: list[dict]) -> dict[str, list[list[str]]]:
    temp_by_day = {row["date"]: row["temp_c"] for row in weather}
    files: dict[str, list[list[str]]] = {"sessions_2024_03.csv": [], "sessions_2024_04.csv": []}
    for day in day_list():
        month_first = day.month == 4
        fname = f"sessions_2024_{day.month:02d}.csv"
        for station in STATIONS:
            cpid, _, _, _, _, tariff_start, neighbourhood = station
            rate = session_rate(station, day, temp_by_day[day.isoformat()])
            count = int(rng.poisson(rate))
            for _ in range(count):
                start_min = int(rng.integers(6 * 60, 22 * 60))
                duration = float(rng.uniform(25, 400))
                energy = float(rng.uniform(5, 55))
                free = tariff_start == "" or day < date.fromisoformat(tariff_start)
                cost = 0.0 if free else round(float(rng.uniform(1.0, 18.0)), 2)
                end_min = min(start_min + int(duration), 23 * 60 + 59)
                files[fname].append(
                    [
                        cpid,
                        format_date(day, month_first),
                        f"{start_min // 60:02d}:{start_min % 60:02d}",
                        format_date(day, month_first),
                        f"{end_min // 60:02d}:{end_min % 60:02d}",
                        f"{duration:.1f}",
                        f"{energy:.2f}",
                        f"{cost:.2f}",
                        f"Site {neighbourhood}",
                        "Glasgow City",
                    ]
                )
    return files


def bait_rows() -> list[list[str]]:
    """Rows that must be dropped, one batch per curation rule."""
    rows = []
    # zero energy (failed handshakes)
    for i in range(3):
        rows.append(["10001", "05/03/2024", "10:00", "05/03/2024", "10:05", "5.0", "0.00", "0.00", "Site Central", "Glasgow City"])
    # zero duration
    for i in range(2):
        rows.append(["10002", "06/03/2024", "11:00", "06/03/2024", "11:00", "0.0", "7.50", "0.00", "Site Central", "Glasgow City"])
    # over battery capacity
    for i in range(2):
        rows.append(["10003", "07/03/2024", "12:00", "07/03/2024", "18:00", "360.0", "150.00", "12.00", "Site West", "Glasgow City"])
    # over daily tariff cap
    for i in range(2):
        rows.append(["10004", "08/03/2024", "09:00", "08/03/2024", "20:00", "660.0", "40.00", "80.00", "Site West", "Glasgow City"])
    # excluded CPID
    for i in range(4):
        rows.append(["62266", "09/03/2024", "10:00", "09/03/2024", "11:00", "60.0", "12.00", "3.00", "Site Old", "Glasgow City"])
    # unparseable timestamps
    rows.append(["10005", "31/31/2024", "09:00", "31/31/2024", "10:00", "60.0", "10.00", "0.00", "Site East", "Glasgow City"])
    rows.append(["10005", "", "", "", "", "60.0", "10.00", "0.00", "Site East", "Glasgow City"])
    # null numeric field
    rows.append(["10001", "14/03/2024", "15:00", "14/03/2024", "16:00", "60.0", "", "0.00", "Site Central", "Glasgow City"])
    return rows


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240301)
    weather = weather_rows(rng)
    files = make_sessions(rng, weather)
    files["sessions_2024_03.csv"].extend(bait_rows())

    header = [
        "CPID",
        "Start Date",
        "Start Time",
        "End Date",
        "End Time",
        "Duration",
        "Total kWh",
        "Cost",
        "Site",
        "Local Authority",
    ]
    for fname, rows in files.items():
        with (OUT / fname).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)

    with (OUT / "stations.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["cpid", "lon", "lat", "connector_class", "is_public_access", "tariff_start_date", "neighbourhood"]
        )
        for cpid, lon, lat, connector, public, tariff, hood in STATIONS:
            writer.writerow([cpid, lon, lat, connector, public, tariff, hood])

    with (OUT / "weather.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "temp_c", "wind_ms", "humidity_pct"])
        for row in weather:
            writer.writerow([row["date"], row["temp_c"], row["wind_ms"], row["humidity_pct"]])

    config = f"""{{
  "capacity_cap_kwh": 100.0,
  "tariff_cap_gbp": 50.0,
  "anomaly_windows": [["{ANOMALY[0]}", "{ANOMALY[1]}"]],
  "split_date": "{SPLIT}",
  "zero_fill": "active-window",
  "date_policy": "auto",
  "knn_k": 4,
  "mesh_inner_edge_m": 200.0,
  "mesh_outer_edge_m": 2000.0,
  "mesh_cutoff_m": 100.0,
  "n_draws": 200
}}
"""
    (OUT / "config.json").write_text(config, encoding="utf-8")
    total = sum(len(rows) for rows in files.values())
    print(f"fixture written to {OUT} ({total} session rows)")


if __name__ == "__main__":
    main()
