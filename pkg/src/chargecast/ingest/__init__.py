"""Raw-log ingestion: parsing, curation, daily aggregation, design matrices."""

from .config import PipelineConfig
from .curate import (
    DEFAULT_EXCLUDED_CPIDS,
    CurationConfig,
    CurationReport,
    curate,
)
from .design import (
    FIXED_EFFECT_COLUMNS,
    ModelFrame,
    TemperatureSpline,
    build_frame,
    spline_basis,
    temporal_split,
    validate_frame,
)
from .panel import PANEL_COLUMNS, ZERO_FILL_POLICIES, aggregate_daily, validate_panel
from .records import (
    CleanSession,
    RawSessionRecord,
    load_sessions_csv,
    load_stations_csv,
    load_weather_csv,
)
from .timestamps import classify_date_order, parse_timestamp, resolve_date_policy

__all__ = [
    "CleanSession",
    "CurationConfig",
    "CurationReport",
    "DEFAULT_EXCLUDED_CPIDS",
    "FIXED_EFFECT_COLUMNS",
    "ModelFrame",
    "PANEL_COLUMNS",
    "PipelineConfig",
    "RawSessionRecord",
    "TemperatureSpline",
    "ZERO_FILL_POLICIES",
    "aggregate_daily",
    "build_frame",
    "classify_date_order",
    "curate",
    "load_sessions_csv",
    "load_stations_csv",
    "load_weather_csv",
    "parse_timestamp",
    "resolve_date_policy",
    "spline_basis",
    "temporal_split",
    "validate_frame",
    "validate_panel",
]
