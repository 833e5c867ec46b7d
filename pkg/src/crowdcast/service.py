"""HTTP facade over the forecasting library.

Endpoints (JSON request/response, versioned ``schema`` field):

* ``GET /zones``                                   zone list + active models
* ``GET /zones/{id}/forecast?h=6d&strategy=...``   per-step forecast, daily totals, risk
* ``GET /zones/{id}/risk?h=6d``                    risk assessments only
* ``POST /whatif``                                 scenario forecast vs. baseline
* ``GET /models``                                  registry listing

The facade adds no computation: every number in a response comes from a
library call on the same inputs. Training never happens in a request; models
are read-only snapshots from the registry.
"""

from __future__ import annotations

import json
from datetime import datetime, timedelta
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any
from urllib.parse import parse_qs, urlparse

from .config import AppConfig
from .errors import (
    ConfigError,
    CoverageError,
    CrowdcastError,
    ValidationError,
)
from .forecasting import (
    ForecastResult,
    HorizonSpec,
    daily_totals,
    forecast_direct,
    forecast_recursive,
)
from .registry import ModelRegistry
from .risk import (
    AggravatingFactors,
    ReferenceDistribution,
    RiskAssessment,
    aggravation_score,
    classify_risk,
    crowding_level,
    weather_extremity,
)
from .timeseries import (
    RESOLUTION_1D,
    Dataset,
    WeatherSeries,
    align,
    ingest_visits,
    ingest_weather,
    read_holidays,
    resample_weather,
)

WEATHER_FIELDS = ("temp_c", "precip_prob_pct", "cloudiness", "windspeed_ms", "precip_mm")


def parse_horizon(text: str, resolution: timedelta) -> HorizonSpec:
    """``10d``/``36h`` converted to steps at the model resolution; bare ints are steps."""
    text = str(text).strip().lower()
    try:
        if text.endswith("d"):
            span = int(text[:-1]) * RESOLUTION_1D
        elif text.endswith("h"):
            span = int(text[:-1]) * timedelta(hours=1)
        else:
            return HorizonSpec(int(text))
    except ValueError:
        raise ValidationError(f"bad horizon {text!r}") from None
    if span % resolution != timedelta(0):
        raise ValidationError(
            f"horizon {text!r} is not a whole number of {resolution} steps"
        )
    return HorizonSpec(span // resolution)


def load_dataset(config: AppConfig) -> Dataset:
    data = config.data_path
    with open(data / "visits.csv") as f:
        zones = ingest_visits(f)
    with open(data / "weather.csv") as f:
        weather = ingest_weather(f)
    holidays_file = data / "holidays.txt"
    holidays = frozenset()
    if holidays_file.is_file():
        with open(holidays_file) as f:
            holidays = read_holidays(f)
    return align(zones, weather, holidays, config.resolution_delta)


def load_forecast_weather(config: AppConfig) -> WeatherSeries:
    """Forecasted weather from the pre-loaded file.

    This function is the provider seam: swap it for a client that pulls a
    live forecast feed and returns the same WeatherSeries, and nothing
    downstream changes.
    """
    with open(config.data_path / "weather_forecast.csv") as f:
        series = ingest_weather(f)
    if series.resolution != config.resolution_delta:
        series = resample_weather(series, config.resolution_delta)
    return series


class AppState:
    """Immutable-after-load snapshot of data, registry, and risk references."""

    def __init__(self, config: AppConfig):
        self.config = config
        self.registry = ModelRegistry(config.registry_path)
        self._dataset: Dataset | None = None
        self._forecast_weather: WeatherSeries | None = None
        self._references: dict[str, ReferenceDistribution] = {}

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            self._dataset = load_dataset(self.config)
        return self._dataset

    @property
    def forecast_weather(self) -> WeatherSeries:
        if self._forecast_weather is None:
            self._forecast_weather = load_forecast_weather(self.config)
        return self._forecast_weather

    def reference(self, zone_id: str) -> ReferenceDistribution:
        if zone_id not in self._references:
            self._references[zone_id] = ReferenceDistribution.from_series(
                self.dataset.zone(zone_id)
            )
        return self._references[zone_id]


def _step_factors(state: AppState, exog: WeatherSeries, ts: datetime) -> AggravatingFactors:
    cfg = state.config
    weights = dict(cfg.risk.factor_weights)
    scores = {}
    for name in weights:
        if name == "weather_extremity":
            record = exog.record_at(ts)
            scores[name] = (
                weather_extremity(record, cfg.risk.comfort_temp_c, cfg.risk.temp_extremity_span_c)
                if record is not None
                else 0.0
            )
        else:
            scores[name] = float(cfg.static_factor_scores.get(name, 0.0))
    return AggravatingFactors(scores=scores, weights=weights)


def _assess_steps(
    state: AppState, result: ForecastResult, exog: WeatherSeries
) -> list[RiskAssessment]:
    ref = state.reference(result.zone_id)
    cfg = state.config.risk
    out = []
    for step in result.steps:
        factors = _step_factors(state, exog, step.timestamp)
        level = crowding_level(
            result.zone_id, step.timestamp, step.prediction, ref, cfg.crowding_cuts
        )
        out.append(classify_risk(level, aggravation_score(factors), cfg, factors))
    return out


def _forecast_payload(
    result: ForecastResult, assessments: list[RiskAssessment]
) -> dict[str, Any]:
    return {
        "origin": result.origin.isoformat(),
        "strategy": result.strategy,
        "steps": [
            {"timestamp": s.timestamp.isoformat(), "prediction": s.prediction, "raw": s.raw}
            for s in result.steps
        ],
        "daily": [
            {"date": d.isoformat(), "total": total, "steps": n}
            for d, total, n in daily_totals(result)
        ],
        "risk": [_risk_payload(a) for a in assessments],
    }


def _risk_payload(a: RiskAssessment) -> dict[str, Any]:
    return {
        "timestamp": a.timestamp.isoformat(),
        "category": a.category,
        "crowding_band": a.crowding.band,
        "percentile": a.crowding.percentile,
        "aggravation": a.aggravation,
        "explanation": list(a.explanation),
    }


def _error(status: int, message: str, **extra: Any) -> tuple[int, dict[str, Any]]:
    payload = {"schema": "error.v1", "error": message}
    payload.update(extra)
    return status, payload


def handle_zones(state: AppState) -> tuple[int, dict[str, Any]]:
    zones = []
    for zone_id in state.dataset.zone_ids:
        version = state.registry.active_version(zone_id)
        kind = None
        if version is not None:
            _, record = state.registry.load(zone_id, version)
            kind = record.kind
        zones.append({"zone_id": zone_id, "active_version": version, "kind": kind})
    return 200, {"schema": "zones.v1", "zones": zones}


def handle_models(state: AppState) -> tuple[int, dict[str, Any]]:
    models = []
    for record in state.registry.records():
        models.append(
            {
                "zone_id": record.zone_id,
                "version": record.version,
                "active": state.registry.active_version(record.zone_id) == record.version,
                "meta": record.meta,
            }
        )
    return 200, {"schema": "models.v1", "models": models}


def _run_forecast(
    state: AppState, zone_id: str, horizon: str | None, strategy: str,
    exog: WeatherSeries,
) -> tuple[ForecastResult, list[RiskAssessment]]:
    config = state.config
    h = parse_horizon(horizon or config.horizon_default, config.resolution_delta)
    model, record = state.registry.load(zone_id)
    trained_res = record.meta.get("resolution")
    if trained_res is not None and trained_res != config.resolution:
        raise ConfigError(
            f"active model for {zone_id} was trained at {trained_res}, "
            f"service runs at {config.resolution}"
        )
    history = state.dataset.zone(zone_id)
    holidays = state.dataset.holidays
    if strategy == "recursive":
        models = getattr(model, "models", None)
        one_step = models[0] if models else model
        result = forecast_recursive(one_step, history, exog, None, h, holidays)
    elif strategy == "direct":
        models = getattr(model, "models", None)
        if not models:
            raise ConfigError(
                f"active model {record.version} for {zone_id} is not a direct bundle"
            )
        result = forecast_direct(models, history, exog, None, h, holidays)
    else:
        raise ValidationError(f"unknown strategy {strategy!r}")
    return result, _assess_steps(state, result, exog)


def handle_forecast(
    state: AppState, zone_id: str, horizon: str | None = None, strategy: str = "recursive"
) -> tuple[int, dict[str, Any]]:
    if zone_id not in state.dataset.zones:
        return _error(404, f"unknown zone {zone_id!r}", zones=state.dataset.zone_ids)
    try:
        result, assessments = _run_forecast(
            state, zone_id, horizon, strategy, state.forecast_weather
        )
    except ConfigError as exc:
        return _error(409, str(exc))
    except CoverageError as exc:
        return _error(422, str(exc))
    except ValidationError as exc:
        return _error(422, str(exc))
    payload = {"schema": "forecast.v1", "zone_id": zone_id}
    payload.update(_forecast_payload(result, assessments))
    return 200, payload


def handle_risk(
    state: AppState, zone_id: str, horizon: str | None = None
) -> tuple[int, dict[str, Any]]:
    status, payload = handle_forecast(state, zone_id, horizon)
    if status != 200:
        return status, payload
    return 200, {
        "schema": "risk.v1",
        "zone_id": zone_id,
        "origin": payload["origin"],
        "risk": payload["risk"],
    }


def _apply_overrides(
    exog: WeatherSeries, step_times: list[datetime], overrides: list[dict[str, Any]]
) -> WeatherSeries:
    patched = {ts: rec for ts, rec in exog.points}
    for i, ov in enumerate(overrides):
        if not isinstance(ov, dict):
            raise ValidationError(f"override {i}: must be an object")
        unknown = set(ov) - {"steps", "set", "add"}
        if unknown:
            raise ValidationError(f"override {i}: unknown keys {sorted(unknown)}")
        steps = ov.get("steps", "all")
        if steps == "all":
            targets = step_times
        else:
            if not isinstance(steps, list) or not steps:
                raise ValidationError(f"override {i}: steps must be 'all' or a list")
            try:
                targets = [step_times[int(s) - 1] for s in steps]
            except (IndexError, ValueError):
                raise ValidationError(
                    f"override {i}: steps must be within 1..{len(step_times)}"
                ) from None
        for mode in ("set", "add"):
            fields = ov.get(mode, {})
            if not isinstance(fields, dict):
                raise ValidationError(f"override {i}: {mode} must be an object")
            for name in fields:
                if name not in WEATHER_FIELDS:
                    raise ValidationError(f"override {i}: unknown weather field {name!r}")
        for ts in targets:
            rec = patched.get(ts)
            if rec is None:
                raise CoverageError(f"no weather forecast at {ts.isoformat()}")
            changes = dict(ov.get("set", {}))
            for name, delta in ov.get("add", {}).items():
                base = changes.get(name, getattr(rec, name))
                changes[name] = float(base) + float(delta)
            try:
                patched[ts] = rec.replace(**{k: float(v) for k, v in changes.items()})
            except (TypeError, ValueError):
                raise ValidationError(f"override {i}: non-numeric value") from None
    return WeatherSeries(exog.resolution, tuple(sorted(patched.items())))


def handle_whatif(state: AppState, body: dict[str, Any]) -> tuple[int, dict[str, Any]]:
    """Recompute the recursive forecast under modified exogenous weather.

    Stateless: reads the registry and data, writes nothing. The response
    carries the baseline, the scenario, and per-step/per-day deltas.
    """
    if not isinstance(body, dict):
        return _error(422, "request body must be a JSON object")
    zone_id = body.get("zone_id")
    if not zone_id or zone_id not in state.dataset.zones:
        return _error(404, f"unknown zone {zone_id!r}", zones=state.dataset.zone_ids)
    horizon = body.get("horizon")
    overrides = body.get("overrides", [])
    if not isinstance(overrides, list):
        return _error(422, "overrides must be a list")
    config = state.config
    try:
        h = parse_horizon(horizon or config.horizon_default, config.resolution_delta)
        history = state.dataset.zone(zone_id)
        step_times = [
            history.end + k * config.resolution_delta for k in range(1, h.steps + 1)
        ]
        scenario_exog = _apply_overrides(state.forecast_weather, step_times, overrides)
        base_result, base_risk = _run_forecast(
            state, zone_id, horizon, "recursive", state.forecast_weather
        )
        scen_result, scen_risk = _run_forecast(
            state, zone_id, horizon, "recursive", scenario_exog
        )
    except ConfigError as exc:
        return _error(409, str(exc))
    except (ValidationError, CoverageError) as exc:
        return _error(422, str(exc))

    step_deltas = [
        {
            "timestamp": s.timestamp.isoformat(),
            "delta": s.prediction - b.prediction,
            "raw_delta": s.raw - b.raw,
        }
        for b, s in zip(base_result.steps, scen_result.steps)
    ]
    base_daily = {d: total for d, total, _ in daily_totals(base_result)}
    scen_daily = {d: total for d, total, _ in daily_totals(scen_result)}
    daily_deltas = [
        {"date": d.isoformat(), "delta": scen_daily[d] - base_daily[d]}
        for d in sorted(base_daily)
    ]
    risk_changes = [
        {
            "timestamp": b.timestamp.isoformat(),
            "baseline": b.category,
            "scenario": s.category,
            "changed": b.category != s.category,
        }
        for b, s in zip(base_risk, scen_risk)
    ]
    return 200, {
        "schema": "whatif.v1",
        "zone_id": zone_id,
        "baseline": _forecast_payload(base_result, base_risk),
        "scenario": _forecast_payload(scen_result, scen_risk),
        "deltas": {"steps": step_deltas, "daily": daily_deltas, "risk": risk_changes},
    }


# ---------------------------------------------------------------------------
# HTTP wiring

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".json": "application/json",
}


def make_server(state: AppState, host: str | None = None, port: int | None = None):
    host = host if host is not None else state.config.server.host
    port = port if port is not None else state.config.server.port

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _send_json(self, status: int, payload: dict[str, Any]) -> None:
            data = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(data)

        def _send_static(self, rel: str) -> bool:
            static_dir = state.config.server.static_dir
            if static_dir is None:
                return False
            root = state.config.path(static_dir).resolve()
            target = (root / (rel or "index.html")).resolve()
            if not str(target).startswith(str(root)) or not target.is_file():
                return False
            data = target.read_bytes()
            self.send_response(200)
            ctype = _STATIC_TYPES.get(target.suffix, "application/octet-stream")
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
            return True

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()

        def do_GET(self):
            url = urlparse(self.path)
            query = {k: v[0] for k, v in parse_qs(url.query).items()}
            parts = [p for p in url.path.split("/") if p]
            try:
                if url.path == "/zones":
                    status, payload = handle_zones(state)
                elif url.path == "/models":
                    status, payload = handle_models(state)
                elif len(parts) == 3 and parts[0] == "zones" and parts[2] == "forecast":
                    status, payload = handle_forecast(
                        state, parts[1], query.get("h"), query.get("strategy", "recursive")
                    )
                elif len(parts) == 3 and parts[0] == "zones" and parts[2] == "risk":
                    status, payload = handle_risk(state, parts[1], query.get("h"))
                else:
                    if self._send_static(url.path.lstrip("/")):
                        return
                    status, payload = _error(404, f"no route for {url.path}")
            except CrowdcastError as exc:
                status, payload = _error(500, str(exc))
            self._send_json(status, payload)

        def do_POST(self):
            url = urlparse(self.path)
            if url.path != "/whatif":
                self._send_json(*_error(404, f"no route for {url.path}"))
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                body = json.loads(self.rfile.read(length) or b"{}")
            except (ValueError, json.JSONDecodeError):
                self._send_json(*_error(422, "request body is not valid JSON"))
                return
            try:
                status, payload = handle_whatif(state, body)
            except CrowdcastError as exc:
                status, payload = _error(500, str(exc))
            self._send_json(status, payload)

    return ThreadingHTTPServer((host, port), Handler)
