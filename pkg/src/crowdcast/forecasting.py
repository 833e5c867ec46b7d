"""One-step and multi-step forecasting over any fitted model.

A model only needs ``column_names`` and ``predict_row``; feature vectors are
assembled by column name (``lag_3``, ``hour``, ``temp_c``, ...) so models
trained after feature filtering keep working. The recursive strategy feeds
raw one-step predictions back as lag inputs; the direct strategy applies one
separately trained model per horizon step to the observed history only.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Callable, Protocol

import numpy as np

from .errors import CoverageError, InsufficientDataError, ValidationError
from .features import FeatureMatrix, LagSpec
from .timeseries import WeatherSeries, ZoneSeries, calendar_features


class Predictor(Protocol):
    @property
    def column_names(self) -> list[str]: ...

    def predict_row(self, row: np.ndarray) -> float: ...


Trainer = Callable[[FeatureMatrix], Predictor]


@dataclass(frozen=True)
class HorizonSpec:
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValidationError("horizon must be >= 1 step")


@dataclass(frozen=True)
class ForecastStep:
    timestamp: datetime
    prediction: float  # clamped at 0 for display/risk
    raw: float


@dataclass(frozen=True)
class ForecastResult:
    zone_id: str
    origin: datetime
    steps: tuple[ForecastStep, ...]
    strategy: str  # "recursive" | "direct"
    resolution: timedelta


def _lag_of(name: str) -> int | None:
    if name.startswith("lag_"):
        try:
            return int(name[4:])
        except ValueError:
            return None
    return None


def model_lags(model: Predictor) -> list[int]:
    return sorted(k for k in (_lag_of(n) for n in model.column_names) if k is not None)


def _check_lags(model: Predictor, lag: LagSpec | None, history: ZoneSeries) -> None:
    needed = model_lags(model)
    if lag is not None:
        extra = [k for k in needed if k not in lag.lags]
        if extra:
            raise ValidationError(f"model uses lags {extra} outside the given LagSpec")
        needed = list(lag.lags)
    # step 1's deepest lookup is origin - (max_lag - 1) steps
    if needed and len(history) < max(needed):
        raise InsufficientDataError(
            f"history of {len(history)} points cannot cover max lag {max(needed)}"
        )


def _step_vector(
    model: Predictor,
    ts: datetime,
    visitors_at: Callable[[datetime], float],
    exog: WeatherSeries,
    holidays: frozenset[date],
) -> np.ndarray:
    cal = calendar_features(ts, holidays)
    weather = exog.record_at(ts)
    values = []
    for name in model.column_names:
        k = _lag_of(name)
        if k is not None:
            values.append(visitors_at(ts - k * exog.resolution))
        elif name == "hour":
            values.append(float(cal.hour))
        elif name == "weekday":
            values.append(float(cal.weekday))
        elif name == "month":
            values.append(float(cal.month))
        elif name == "is_weekend":
            values.append(float(cal.is_weekend))
        elif name == "is_holiday":
            values.append(float(cal.is_holiday))
        else:
            if weather is None:
                raise CoverageError(f"no weather forecast at {ts.isoformat()}")
            try:
                values.append(float(getattr(weather, name)))
            except AttributeError:
                raise ValidationError(f"unknown feature column {name!r}") from None
    return np.array(values, dtype=float)


def _history_reader(history: ZoneSeries, gap_fill: str) -> Callable[[datetime], float]:
    if gap_fill not in ("locf", "error"):
        raise ValidationError(f"unknown gap_fill policy {gap_fill!r}")
    stamps = history.timestamps

    def read(ts: datetime) -> float:
        v = history.value_at(ts)
        if v is not None:
            return v
        if gap_fill == "error":
            raise CoverageError(f"history gap at {ts.isoformat()}")
        i = bisect_right(stamps, ts)
        if i == 0:
            raise CoverageError(f"lag {ts.isoformat()} precedes history start")
        return history.points[i - 1][1]

    return read


def _require_exog(exog: WeatherSeries, timestamps: list[datetime]) -> None:
    missing = [t for t in timestamps if exog.record_at(t) is None]
    if missing:
        raise CoverageError(
            "weather forecast does not cover "
            + ", ".join(t.isoformat() for t in missing[:5])
            + ("..." if len(missing) > 5 else "")
        )


def forecast_recursive(
    model: Predictor,
    history: ZoneSeries,
    exog: WeatherSeries,
    lag: LagSpec | None,
    h: HorizonSpec,
    holidays: frozenset[date] = frozenset(),
    gap_fill: str = "locf",
) -> ForecastResult:
    """Multi-step forecast with one model, feeding predictions back as lags.

    Lags that reach at or before the origin read observed history (gaps
    handled per ``gap_fill``: carry the last observation forward, or fail);
    later lags read earlier raw predictions.
    """
    if exog.resolution != history.resolution:
        raise ValidationError("history and exogenous forecast must share resolution")
    _check_lags(model, lag, history)
    res = history.resolution
    origin = history.end
    step_times = [origin + k * res for k in range(1, h.steps + 1)]
    _require_exog(exog, step_times)
    read_history = _history_reader(history, gap_fill)
    predicted: dict[datetime, float] = {}

    def visitors_at(ts: datetime) -> float:
        if ts in predicted:
            return predicted[ts]
        if ts > origin:
            raise CoverageError(f"recursion needs unpredicted future value at {ts.isoformat()}")
        return read_history(ts)

    steps = []
    for ts in step_times:
        raw = float(model.predict_row(_step_vector(model, ts, visitors_at, exog, holidays)))
        predicted[ts] = raw
        steps.append(ForecastStep(ts, max(0.0, raw), raw))
    return ForecastResult(history.zone_id, origin, tuple(steps), "recursive", res)


def train_direct(m: FeatureMatrix, h: HorizonSpec, trainer: Trainer) -> list[Predictor]:
    """Train one model per horizon step by shifting the target.

    Model k keeps the original feature rows but learns the target k-1 steps
    further ahead; rows whose shifted target falls into a gap are dropped.
    """
    res = m.resolution
    models: list[Predictor] = []
    ts = m.row_timestamps
    n = m.n_rows
    for k in range(1, h.steps + 1):
        shift = k - 1
        keep = [
            i
            for i in range(n - shift)
            if ts[i + shift] == ts[i] + shift * res
        ]
        if len(keep) < 2:
            raise InsufficientDataError(
                f"direct step {k}: only {len(keep)} rows after target shift"
            )
        shifted = FeatureMatrix(
            columns=list(m.columns),
            rows=m.rows[keep],
            target=m.target[[i + shift for i in keep]],
            row_timestamps=[ts[i] for i in keep],
            zone_id=m.zone_id,
            resolution=res,
        )
        models.append(trainer(shifted))
    return models


def forecast_direct(
    models: list[Predictor],
    history: ZoneSeries,
    exog: WeatherSeries,
    lag: LagSpec | None,
    h: HorizonSpec,
    holidays: frozenset[date] = frozenset(),
    gap_fill: str = "locf",
) -> ForecastResult:
    """Step k predicted by model k from observed history only (no feedback).

    Every model sees the feature vector of the first future bucket, exactly
    as it was trained (same features, shifted target).
    """
    if len(models) < h.steps:
        raise ValidationError(f"need {h.steps} models, got {len(models)}")
    if exog.resolution != history.resolution:
        raise ValidationError("history and exogenous forecast must share resolution")
    res = history.resolution
    origin = history.end
    first = origin + res
    read_history = _history_reader(history, gap_fill)

    def visitors_at(ts: datetime) -> float:
        if ts > origin:
            raise CoverageError("direct strategy cannot read future values")
        return read_history(ts)

    _require_exog(exog, [first])
    steps = []
    for k in range(1, h.steps + 1):
        model = models[k - 1]
        _check_lags(model, lag, history)
        raw = float(model.predict_row(_step_vector(model, first, visitors_at, exog, holidays)))
        steps.append(ForecastStep(origin + k * res, max(0.0, raw), raw))
    return ForecastResult(history.zone_id, origin, tuple(steps), "direct", res)


def daily_totals(result: ForecastResult) -> list[tuple[date, float, int]]:
    """Clamped per-step predictions summed per local date, with step counts."""
    buckets: dict[date, list[float]] = {}
    for step in result.steps:
        buckets.setdefault(step.timestamp.date(), []).append(step.prediction)
    return [(d, sum(vs), len(vs)) for d, vs in sorted(buckets.items())]


def serialize_forecast(result: ForecastResult, sink) -> None:
    sink.write("timestamp,zone_id,prediction,strategy\n")
    for step in result.steps:
        sink.write(
            f"{step.timestamp.isoformat(timespec='minutes')},{result.zone_id},"
            f"{step.prediction!r},{result.strategy}\n"
        )


def serialize_daily_totals(result: ForecastResult, sink) -> None:
    sink.write("date,zone_id,prediction,steps\n")
    for d, total, n in daily_totals(result):
        sink.write(f"{d.isoformat()},{result.zone_id},{total!r},{n}\n")
