"""JSON run configuration shared by the pipeline and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

from ..errors import UserInputError
from .curate import DEFAULT_EXCLUDED_CPIDS, CurationConfig
from .panel import ZERO_FILL_POLICIES


def _parse_date(text: str, label: str) -> date:
    try:
        return datetime.strptime(text, "%Y-%m-%d").date()
    except (TypeError, ValueError) as exc:
        raise UserInputError(f"{label} must be an ISO date (YYYY-MM-DD): {text!r}") from exc


@dataclass
class PipelineConfig:
    """Everything a full run needs beyond the input file paths."""

    capacity_cap_kwh: float = 100.0
    tariff_cap_gbp: float = 50.0
    excluded_cpids: tuple[str, ...] = DEFAULT_EXCLUDED_CPIDS
    anomaly_windows: tuple[tuple[date, date], ...] = ()
    split_date: date = date(2024, 10, 6)
    zero_fill: str = "active-window"
    date_policy: str = "auto"
    column_map: dict = field(default_factory=dict)
    knn_k: int = 4
    mesh_inner_edge_m: float = 200.0
    mesh_outer_edge_m: float = 2000.0
    mesh_cutoff_m: float = 100.0
    grid_points_per_axis: int = 5
    grid_sd_span: float = 2.5
    n_draws: int = 200

    def __post_init__(self):
        if self.zero_fill not in ZERO_FILL_POLICIES:
            raise UserInputError(f"zero_fill must be one of {ZERO_FILL_POLICIES}")
        if self.knn_k < 1:
            raise UserInputError("knn_k must be at least 1")

    def curation(self) -> CurationConfig:
        return CurationConfig(
            capacity_cap_kwh=self.capacity_cap_kwh,
            tariff_cap_gbp=self.tariff_cap_gbp,
            excluded_cpids=self.excluded_cpids,
            excluded_windows=self.anomaly_windows,
            date_policy=self.date_policy,
        )

    @classmethod
    def from_json(cls, path: Path | str) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UserInputError(f"cannot read config {path}: {exc}") from exc
        known = {
            "capacity_cap_kwh": float,
            "tariff_cap_gbp": float,
            "zero_fill": str,
            "date_policy": str,
            "knn_k": int,
            "mesh_inner_edge_m": float,
            "mesh_outer_edge_m": float,
            "mesh_cutoff_m": float,
            "grid_points_per_axis": int,
            "grid_sd_span": float,
            "n_draws": int,
        }
        kwargs = {}
        for key, caster in known.items():
            if key in raw:
                kwargs[key] = caster(raw[key])
        if "excluded_cpids" in raw:
            kwargs["excluded_cpids"] = tuple(str(c) for c in raw["excluded_cpids"])
        if "anomaly_windows" in raw:
            kwargs["anomaly_windows"] = tuple(
                (_parse_date(lo, "anomaly window start"), _parse_date(hi, "anomaly window end"))
                for lo, hi in raw["anomaly_windows"]
            )
        if "split_date" in raw:
            kwargs["split_date"] = _parse_date(raw["split_date"], "split_date")
        if "column_map" in raw:
            kwargs["column_map"] = dict(raw["column_map"])
        unknown = set(raw) - set(known) - {
            "excluded_cpids",
            "anomaly_windows",
            "split_date",
            "column_map",
        }
        if unknown:
            raise UserInputError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**kwargs)
