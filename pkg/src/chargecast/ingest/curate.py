"""Session curation: rule-based filtering of raw charging records.

Every rejected record is attributed to exactly one rule (the first that
fires, in the documented order), so the report's drop counts plus the kept
count always add back up to the input total. Curation is idempotent: records
derived from already-clean sessions pass every rule unchanged.

Rule order: bad-timestamp, null-field, excluded-cpid, excluded-window,
zero-duration, zero-energy, over-capacity, over-tariff.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from ..errors import UserInputError
from .records import CleanSession, RawSessionRecord
from .timestamps import DatePolicy, parse_timestamp, resolve_date_policy

DEFAULT_EXCLUDED_CPIDS = (
    "62201",
    "62202",
    "62203",
    "62266",
    "62261",
    "50433",
    "62123",
)

RULES = (
    "bad-timestamp",
    "null-field",
    "excluded-cpid",
    "excluded-window",
    "zero-duration",
    "zero-energy",
    "over-capacity",
    "over-tariff",
)


@dataclass(frozen=True)
class CurationConfig:
    """Caps and exclusions applied during curation."""

    capacity_cap_kwh: float = 100.0
    tariff_cap_gbp: float = 50.0
    excluded_cpids: tuple[str, ...] = DEFAULT_EXCLUDED_CPIDS
    excluded_windows: tuple[tuple[date, date], ...] = ()
    date_policy: str = "auto"  # "auto" | "day-first" | "month-first"

    def __post_init__(self):
        if self.capacity_cap_kwh <= 0 or self.tariff_cap_gbp <= 0:
            raise UserInputError("curation caps must be positive")
        for lo, hi in self.excluded_windows:
            if lo > hi:
                raise UserInputError(f"excluded window {lo}..{hi} is reversed")


@dataclass
class CurationReport:
    """Bookkeeping of everything curation dropped and why."""

    total_input: int = 0
    total_kept: int = 0
    dropped_by_rule: dict = field(default_factory=dict)
    records_per_month: dict = field(default_factory=dict)
    excluded_cpids: list = field(default_factory=list)
    excluded_windows: list = field(default_factory=list)
    file_date_policies: dict = field(default_factory=dict)
    unmatched_session_cpids: dict = field(default_factory=dict)

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped_by_rule.values())

    def to_dict(self) -> dict:
        return {
            "total_input": self.total_input,
            "total_kept": self.total_kept,
            "total_dropped": self.total_dropped,
            "dropped_by_rule": dict(sorted(self.dropped_by_rule.items())),
            "records_per_month": dict(sorted(self.records_per_month.items())),
            "excluded_cpids": list(self.excluded_cpids),
            "excluded_windows": [[str(lo), str(hi)] for lo, hi in self.excluded_windows],
            "file_date_policies": dict(sorted(self.file_date_policies.items())),
            "unmatched_session_cpids": dict(sorted(self.unmatched_session_cpids.items())),
        }

    def write_json(self, path: Path | str) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )


def _file_policies(
    records: list[RawSessionRecord], configured: str
) -> dict[str, DatePolicy]:
    if configured in ("day-first", "month-first"):
        return defaultdict(lambda: configured)
    if configured != "auto":
        raise UserInputError(f"unknown date policy {configured!r}")
    by_file: dict[str, list[str]] = defaultdict(list)
    for rec in records:
        by_file[rec.source_file].append(rec.start_raw)
    return {name: resolve_date_policy(raws) for name, raws in by_file.items()}


def curate(
    records: list[RawSessionRecord], config: CurationConfig | None = None
) -> tuple[list[CleanSession], CurationReport]:
    """Apply all curation rules; failures are drops with reasons, never fatal.

    The one hard error is an ``auto`` date policy over a file with no
    unambiguous date at all.
    """
    config = config or CurationConfig()
    report = CurationReport(
        total_input=len(records),
        dropped_by_rule=Counter({rule: 0 for rule in RULES}),
        excluded_cpids=sorted(config.excluded_cpids),
        excluded_windows=list(config.excluded_windows),
    )
    policies = _file_policies(records, config.date_policy)
    if config.date_policy == "auto":
        report.file_date_policies = dict(policies)

    excluded = set(config.excluded_cpids)
    clean: list[CleanSession] = []
    month_counts: Counter = Counter()
    for rec in records:
        policy = policies[rec.source_file]
        try:
            start = parse_timestamp(rec.start_raw, policy)
        except ValueError:
            report.dropped_by_rule["bad-timestamp"] += 1
            continue
        day = start.date()
        month_counts[f"{day.year:04d}-{day.month:02d}"] += 1
        if rec.duration_min is None or rec.energy_kwh is None or rec.cost is None:
            report.dropped_by_rule["null-field"] += 1
            continue
        if rec.cpid in excluded:
            report.dropped_by_rule["excluded-cpid"] += 1
            continue
        if any(lo <= day <= hi for lo, hi in config.excluded_windows):
            report.dropped_by_rule["excluded-window"] += 1
            continue
        if rec.duration_min <= 0:
            report.dropped_by_rule["zero-duration"] += 1
            continue
        if rec.energy_kwh <= 0:
            report.dropped_by_rule["zero-energy"] += 1
            continue
        if rec.energy_kwh > config.capacity_cap_kwh:
            report.dropped_by_rule["over-capacity"] += 1
            continue
        if rec.cost > config.tariff_cap_gbp:
            report.dropped_by_rule["over-tariff"] += 1
            continue
        clean.append(
            CleanSession(
                cpid=rec.cpid,
                start=start,
                day=day,
                energy_kwh=float(rec.energy_kwh),
                cost=float(rec.cost),
            )
        )
    report.total_kept = len(clean)
    report.records_per_month = dict(month_counts)
    report.dropped_by_rule = dict(report.dropped_by_rule)
    assert report.total_kept + report.total_dropped == report.total_input
    return clean, report
