"""Supervised feature matrices and correlation-filter feature selection.

A row for prediction time t carries the zone's visitor counts at the
configured lags, calendar features of t, and the weather at t; the target is
the visitor count at t. Rows whose lag window crosses a gap are dropped, not
imputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .errors import DegenerateSelectionError, InsufficientDataError, ValidationError
from .timeseries import Dataset, calendar_features

CALENDAR_COLUMNS = ("hour", "weekday", "month", "is_weekend", "is_holiday")
WEATHER_COLUMNS = ("temp_c", "precip_prob_pct", "cloudiness", "windspeed_ms", "precip_mm")


@dataclass(frozen=True)
class LagSpec:
    """Lag offsets in resolution units, e.g. (1, 2, 24) on an hourly model."""

    lags: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lags", tuple(int(k) for k in self.lags))
        if not self.lags:
            raise ValidationError("lags must be non-empty")
        if any(k < 1 for k in self.lags):
            raise ValidationError("lags must be >= 1")
        if any(b <= a for a, b in zip(self.lags, self.lags[1:])):
            raise ValidationError("lags must be strictly increasing")

    @property
    def max_lag(self) -> int:
        return self.lags[-1]


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "lag" | "calendar" | "weather"


@dataclass
class FeatureMatrix:
    """Rectangular feature rows with per-column metadata.

    Treated as immutable after construction; rows/target are float arrays of
    matching length and every entry is defined.
    """

    columns: list[Column]
    rows: np.ndarray
    target: np.ndarray
    row_timestamps: list[datetime]
    zone_id: str
    resolution: timedelta
    n_dropped: int = 0

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns):
            raise ValidationError("rows must be (n, n_columns)")
        if len(self.target) != self.rows.shape[0] or len(self.row_timestamps) != self.rows.shape[0]:
            raise ValidationError("target/rows/timestamps lengths differ")
        if not np.all(np.isfinite(self.rows)) or not np.all(np.isfinite(self.target)):
            raise ValidationError("feature matrix has undefined entries")

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.column_names.index(name)]
        except ValueError:
            raise ValidationError(f"no column {name!r}") from None

    def select(self, names: list[str]) -> np.ndarray:
        """Columns by name, in the requested order (for model input)."""
        idx = []
        for name in names:
            try:
                idx.append(self.column_names.index(name))
            except ValueError:
                raise ValidationError(f"matrix lacks column {name!r}") from None
        return self.rows[:, idx]


def build_matrix(ds: Dataset, zone_id: str, lag: LagSpec) -> FeatureMatrix:
    """Assemble the lag/calendar/weather matrix for one zone.

    A candidate row exists for every observed point t; it survives only if
    every lagged visitor count and the weather bucket at t are present.
    """
    series = ds.zone(zone_id)
    res = ds.resolution
    if len(series) <= lag.max_lag:
        raise InsufficientDataError(
            f"zone {zone_id}: {len(series)} points cannot support max lag {lag.max_lag}"
        )
    columns = (
        [Column(f"lag_{k}", "lag") for k in lag.lags]
        + [Column(name, "calendar") for name in CALENDAR_COLUMNS]
        + [Column(name, "weather") for name in WEATHER_COLUMNS]
    )
    rows: list[list[float]] = []
    target: list[float] = []
    stamps: list[datetime] = []
    dropped = 0
    for t, y in series.points:
        lag_values = [series.value_at(t - k * res) for k in lag.lags]
        weather = ds.weather.record_at(t)
        if any(v is None for v in lag_values) or weather is None:
            dropped += 1
            continue
        cal = calendar_features(t, ds.holidays)
        rows.append(
            [float(v) for v in lag_values]
            + [
                float(cal.hour),
                float(cal.weekday),
                float(cal.month),
                float(cal.is_weekend),
                float(cal.is_holiday),
            ]
            + [weather.temp_c, weather.precip_prob_pct, weather.cloudiness,
               weather.windspeed_ms, weather.precip_mm]
        )
        target.append(y)
        stamps.append(t)
    if len(rows) < 2:
        raise InsufficientDataError(
            f"zone {zone_id}: only {len(rows)} usable rows after lag/gap handling"
        )
    return FeatureMatrix(
        columns=columns,
        rows=np.array(rows, dtype=float),
        target=np.array(target, dtype=float),
        row_timestamps=stamps,
        zone_id=zone_id,
        resolution=res,
        n_dropped=dropped,
    )


def build_daily_regression(ds: Dataset, zone_id: str) -> FeatureMatrix:
    """Daily-totals regression frame: four weather means plus a weekend flag.

    Target is the zone's daily visitor total; weather columns are daily means.
    Days with incomplete coverage on either side are dropped (counted in
    ``n_dropped``). This is the frame behind the coefficient-table benchmark,
    so actual precipitation is deliberately excluded.
    """
    from .timeseries import RESOLUTION_1D, resample, resample_weather

    series = ds.zone(zone_id)
    daily = resample(series, RESOLUTION_1D, "sum") if ds.resolution != RESOLUTION_1D else series
    weather = (
        resample_weather(ds.weather, RESOLUTION_1D)
        if ds.resolution != RESOLUTION_1D
        else ds.weather
    )
    columns = [Column(name, "weather") for name in WEATHER_COLUMNS[:4]] + [
        Column("is_weekend", "calendar")
    ]
    rows, target, stamps = [], [], []
    dropped = 0
    for i, (t, total) in enumerate(daily.points):
        rec = weather.record_at(t)
        full = daily.coverage is None or daily.coverage[i] == 1.0
        if rec is None or not full:
            dropped += 1
            continue
        cal = calendar_features(t, ds.holidays)
        rows.append([rec.temp_c, rec.precip_prob_pct, rec.cloudiness, rec.windspeed_ms,
                     float(cal.is_weekend)])
        target.append(total)
        stamps.append(t)
    if len(rows) < 2:
        raise InsufficientDataError(f"zone {zone_id}: only {len(rows)} complete days")
    return FeatureMatrix(
        columns=columns,
        rows=np.array(rows, dtype=float),
        target=np.array(target, dtype=float),
        row_timestamps=stamps,
        zone_id=zone_id,
        resolution=RESOLUTION_1D,
        n_dropped=dropped,
    )


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Population Pearson correlation; None when either side has no variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("pearson needs two equal-length vectors")
    if len(x) < 2:
        raise ValidationError("pearson needs at least 2 samples")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.mean(xc * xc))
    sy = np.sqrt(np.mean(yc * yc))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(np.mean(xc * yc) / (sx * sy))
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class ColumnReport:
    name: str
    kind: str
    variance: float
    correlation_with_target: float | None
    kept: bool
    reason: str


@dataclass(frozen=True)
class SelectionReport:
    entries: tuple[ColumnReport, ...]

    def to_text(self) -> str:
        lines = ["column\tkind\tvariance\tcorrelation\tkept\treason"]
        for e in self.entries:
            corr = "undefined" if e.correlation_with_target is None else f"{e.correlation_with_target:.6g}"
            lines.append(
                f"{e.name}\t{e.kind}\t{e.variance:.6g}\t{corr}\t{str(e.kept).lower()}\t{e.reason}"
            )
        return "\n".join(lines) + "\n"


def filter_features(
    m: FeatureMatrix,
    min_variance: float = 1e-12,
    min_abs_corr: float = 0.05,
) -> tuple[FeatureMatrix, SelectionReport]:
    """Drop low-variance and target-uncorrelated columns.

    A column stays when its (population) variance is at least ``min_variance``
    and, for a positive ``min_abs_corr``, its correlation with the target is
    defined with |r| at or above the threshold. Column order is preserved, so
    re-filtering with the same thresholds is a no-op.
    """
    if min_variance < 0 or min_abs_corr < 0:
        raise ValidationError("thresholds must be >= 0")
    entries = []
    keep_idx = []
    for i, col in enumerate(m.columns):
        x = m.rows[:, i]
        variance = float(np.var(x))
        corr = pearson(x, m.target) if variance > 0.0 else None
        if variance < min_variance:
            kept, reason = False, "zero variance" if variance == 0.0 else "low variance"
        elif min_abs_corr > 0.0 and corr is None:
            kept, reason = False, "undefined correlation with target"
        elif min_abs_corr > 0.0 and abs(corr) < min_abs_corr:
            kept, reason = False, f"|correlation| {abs(corr):.4g} below {min_abs_corr:.4g}"
        else:
            kept, reason = True, ""
        entries.append(ColumnReport(col.name, col.kind, variance, corr, kept, reason))
        if kept:
            keep_idx.append(i)
    if not keep_idx:
        raise DegenerateSelectionError("feature filter removed every column")
    filtered = FeatureMatrix(
        columns=[m.columns[i] for i in keep_idx],
        rows=m.rows[:, keep_idx],
        target=m.target,
        row_timestamps=list(m.row_timestamps),
        zone_id=m.zone_id,
        resolution=m.resolution,
        n_dropped=m.n_dropped,
    )
    return filtered, SelectionReport(tuple(entries))


def split_matrix(m: FeatureMatrix, boundary: datetime) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Rows strictly before the boundary vs. rows at/after it."""
    before = [i for i, t in enumerate(m.row_timestamps) if t < boundary]
    after = [i for i, t in enumerate(m.row_timestamps) if t >= boundary]
    if len(before) < 2 or len(after) < 2:
        raise InsufficientDataError(
            f"split at {boundary.isoformat()} leaves {len(before)}/{len(after)} rows"
        )
    def take(idx):
        return FeatureMatrix(
            columns=list(m.columns),
            rows=m.rows[idx],
            target=m.target[idx],
            row_timestamps=[m.row_timestamps[i] for i in idx],
            zone_id=m.zone_id,
            resolution=m.resolution,
        )
    return take(before), take(after)
