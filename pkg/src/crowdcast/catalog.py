"""Data-source catalog: everything the decision-support system could ingest.

Three sources are implemented end to end (visitor counts, weather, the
holiday/event calendar); the rest are documented here as schema stubs so a
future ingester has a fixed contract to build against. Stub schemas are
validated for shape but have no parser.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    dtype: str  # "timestamp" | "string" | "float" | "int" | "bool"
    description: str


@dataclass(frozen=True)
class SourceSchema:
    name: str
    side: str  # which half of the risk picture it feeds: "crowding" | "context" | "both"
    horizon: str  # "short" | "midterm" | "short/midterm"
    columns: tuple[ColumnSpec, ...]
    implemented: bool
    notes: str = ""


def _ts(description: str = "ISO-8601 with offset") -> ColumnSpec:
    return ColumnSpec("timestamp", "timestamp", description)


DATA_CATALOG: dict[str, SourceSchema] = {
    "visits": SourceSchema(
        name="visits",
        side="crowding",
        horizon="short/midterm",
        columns=(
            _ts(),
            ColumnSpec("zone_id", "string", "zone identifier"),
            ColumnSpec("visitors", "float", "visitors in the bucket, >= 0"),
        ),
        implemented=True,
        notes="file: visits.csv; see timeseries.ingest_visits",
    ),
    "weather": SourceSchema(
        name="weather",
        side="both",
        horizon="short/midterm",
        columns=(
            _ts(),
            ColumnSpec("temp_c", "float", "air temperature"),
            ColumnSpec("precip_prob_pct", "float", "0..100"),
            ColumnSpec("cloudiness", "float", ">= 0 index"),
            ColumnSpec("windspeed_ms", "float", ">= 0"),
            ColumnSpec("precip_mm", "float", ">= 0"),
        ),
        implemented=True,
        notes="files: weather.csv / weather_forecast.csv; see timeseries.ingest_weather",
    ),
    "event_calendar": SourceSchema(
        name="event_calendar",
        side="crowding",
        horizon="short/midterm",
        columns=(ColumnSpec("date", "string", "ISO date of a holiday or event day"),),
        implemented=True,
        notes="file: holidays.txt feeds the is_holiday feature; synthetic event"
        " spikes model ticketed events until a richer feed lands",
    ),
    "parking": SourceSchema(
        name="parking",
        side="crowding",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("garage_id", "string", "public garage identifier"),
            ColumnSpec("occupied", "int", "occupied spots"),
            ColumnSpec("capacity", "int", "total spots"),
        ),
        implemented=False,
    ),
    "public_transport": SourceSchema(
        name="public_transport",
        side="crowding",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("stop_id", "string", "stop identifier"),
            ColumnSpec("line", "string", "service line"),
            ColumnSpec("vehicle_id", "string", "vehicle identifier"),
            ColumnSpec("occupancy_class", "string", "reported crowding class"),
        ),
        implemented=False,
    ),
    "shared_mobility": SourceSchema(
        name="shared_mobility",
        side="crowding",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("vehicle_id", "string", "scooter/bicycle identifier"),
            ColumnSpec("lat", "float", "WGS84"),
            ColumnSpec("lon", "float", "WGS84"),
            ColumnSpec("parked", "bool", "idle at the timestamp"),
        ),
        implemented=False,
    ),
    "bicycle_counts": SourceSchema(
        name="bicycle_counts",
        side="crowding",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("counter_id", "string", "counting site"),
            ColumnSpec("count", "int", "passages in the bucket"),
        ),
        implemented=False,
    ),
    "floating_car": SourceSchema(
        name="floating_car",
        side="crowding",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("segment_id", "string", "road segment"),
            ColumnSpec("travel_time_s", "float", "measured travel time"),
        ),
        implemented=False,
    ),
    "loop_detectors": SourceSchema(
        name="loop_detectors",
        side="crowding",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("detector_id", "string", "double-loop site"),
            ColumnSpec("flow_veh_h", "float", "flow"),
            ColumnSpec("speed_kmh", "float", "speed"),
        ),
        implemented=False,
    ),
    "incident_reports": SourceSchema(
        name="incident_reports",
        side="context",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("zone_id", "string", "affected zone"),
            ColumnSpec("kind", "string", "nuisance/incident class"),
            ColumnSpec("severity", "int", "reported severity"),
        ),
        implemented=False,
        notes="confidential feed; used for validation, never as a feature here",
    ),
    "social_sentiment": SourceSchema(
        name="social_sentiment",
        side="context",
        horizon="short",
        columns=(
            _ts(),
            ColumnSpec("zone_id", "string", "zone the posts geolocate to"),
            ColumnSpec("sentiment", "float", "-1..1 aggregate"),
            ColumnSpec("volume", "int", "post count"),
        ),
        implemented=False,
    ),
    "crowd_measures": SourceSchema(
        name="crowd_measures",
        side="context",
        horizon="short/midterm",
        columns=(
            _ts(),
            ColumnSpec("zone_id", "string", "zone under a measure"),
            ColumnSpec("measure", "string", "closure/signage/curfew/..."),
            ColumnSpec("active", "bool", "in force at the timestamp"),
        ),
        implemented=False,
    ),
    "personnel": SourceSchema(
        name="personnel",
        side="context",
        horizon="short/midterm",
        columns=(
            _ts(),
            ColumnSpec("zone_id", "string", "deployment zone"),
            ColumnSpec("staff", "int", "crowd-management staff on the ground"),
        ),
        implemented=False,
    ),
    "visit_purpose": SourceSchema(
        name="visit_purpose",
        side="context",
        horizon="short/midterm",
        columns=(
            _ts(),
            ColumnSpec("zone_id", "string", "zone"),
            ColumnSpec("purpose", "string", "beach/event/transit/..."),
            ColumnSpec("share", "float", "0..1 share of visitors"),
        ),
        implemented=False,
    ),
}


def implemented_sources() -> list[str]:
    return sorted(name for name, s in DATA_CATALOG.items() if s.implemented)


def stub_sources() -> list[str]:
    return sorted(name for name, s in DATA_CATALOG.items() if not s.implemented)
