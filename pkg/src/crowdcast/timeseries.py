"""Domain types and operations for visitor/weather time series.

All timestamps are timezone-aware datetimes at minute precision. A series
lives on a regular grid: consecutive timestamps are positive integer
multiples of the series resolution, and a spacing larger than one step is a
gap. Gaps stay explicit; nothing here ever fills them with zeros.

File formats (delimiter-separated text, ISO-8601 timestamps with offset):

* visitors: header ``timestamp,zone_id,visitors``
* weather:  header ``timestamp,temp_c,precip_prob_pct,cloudiness,windspeed_ms,precip_mm``
* holidays: one ISO date per line
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from functools import cached_property
from typing import IO, Iterable, Mapping

from .errors import (
    AlignmentError,
    ConflictError,
    ParseError,
    ValidationError,
)

RESOLUTION_15M = timedelta(minutes=15)
RESOLUTION_1H = timedelta(hours=1)
RESOLUTION_1D = timedelta(days=1)

_DAY = timedelta(days=1)

VISITS_HEADER = ("timestamp", "zone_id", "visitors")
WEATHER_HEADER = (
    "timestamp",
    "temp_c",
    "precip_prob_pct",
    "cloudiness",
    "windspeed_ms",
    "precip_mm",
)


def parse_resolution(text: str) -> timedelta:
    """Parse a short resolution label such as ``15m``, ``1h`` or ``1d``."""
    text = text.strip().lower()
    units = {"m": timedelta(minutes=1), "h": timedelta(hours=1), "d": timedelta(days=1)}
    if text and text[-1] in units:
        try:
            n = int(text[:-1])
        except ValueError:
            raise ValidationError(f"bad resolution {text!r}") from None
        if n <= 0:
            raise ValidationError(f"bad resolution {text!r}")
        return n * units[text[-1]]
    raise ValidationError(f"bad resolution {text!r} (expected e.g. 15m, 1h, 1d)")


def format_resolution(res: timedelta) -> str:
    minutes = int(res.total_seconds() // 60)
    if minutes % (24 * 60) == 0:
        return f"{minutes // (24 * 60)}d"
    if minutes % 60 == 0:
        return f"{minutes // 60}h"
    return f"{minutes}m"


def parse_timestamp(text: str, line: int | None = None) -> datetime:
    """Parse an ISO-8601 timestamp. The timezone offset is mandatory."""
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError:
        raise ParseError(f"malformed timestamp {text!r}", line) from None
    if ts.tzinfo is None:
        raise ParseError(f"timestamp {text!r} has no timezone offset", line)
    return ts


def _check_minute_precision(ts: datetime) -> None:
    if ts.second != 0 or ts.microsecond != 0:
        raise ValidationError(f"timestamp {ts.isoformat()} is finer than one minute")


def floor_to(ts: datetime, step: timedelta) -> datetime:
    """Floor a timestamp to its bucket start, in the timestamp's own wall clock.

    Sub-daily steps must divide 24 h; steps of a day or more must be whole days.
    """
    _check_minute_precision(ts)
    if step >= _DAY:
        if step % _DAY != timedelta(0):
            raise ValidationError(f"step {step} is not a whole number of days")
        k = step // _DAY
        days = ts.toordinal()
        floored = date.fromordinal(days - days % k)
        return datetime.combine(floored, datetime.min.time(), tzinfo=ts.tzinfo)
    if _DAY % step != timedelta(0):
        raise ValidationError(f"step {step} does not divide one day")
    midnight = ts.replace(hour=0, minute=0)
    return midnight + ((ts - midnight) // step) * step


@dataclass(frozen=True)
class CalendarFeatures:
    hour: int
    weekday: int  # Monday=0
    month: int
    is_weekend: bool
    is_holiday: bool


def calendar_features(t: datetime, holidays: frozenset[date] | set[date]) -> CalendarFeatures:
    """Calendar features of a timestamp in its own (wall clock) timezone."""
    weekday = t.weekday()
    return CalendarFeatures(
        hour=t.hour,
        weekday=weekday,
        month=t.month,
        is_weekend=weekday in (5, 6),
        is_holiday=t.date() in holidays,
    )


def _validate_grid(
    timestamps: tuple[datetime, ...], resolution: timedelta, what: str
) -> None:
    if resolution <= timedelta(0):
        raise ValidationError(f"{what}: resolution must be positive")
    for ts in timestamps:
        _check_minute_precision(ts)
    for a, b in zip(timestamps, timestamps[1:]):
        delta = b - a
        if delta <= timedelta(0):
            raise ValidationError(f"{what}: timestamps not strictly increasing at {b.isoformat()}")
        if delta % resolution != timedelta(0):
            raise ValidationError(
                f"{what}: spacing {delta} at {b.isoformat()} is not a multiple of {resolution}"
            )


@dataclass(frozen=True)
class ZoneSeries:
    """Visitor counts for one zone on a regular time grid.

    ``coverage`` tracks, per point, the fraction of source sub-buckets that
    were present when the point was produced by resampling (1.0 for raw
    ingested data). A missing bucket is simply absent from ``points``.
    """

    zone_id: str
    resolution: timedelta
    points: tuple[tuple[datetime, float], ...]
    coverage: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((t, float(v)) for t, v in self.points))
        if not self.zone_id:
            raise ValidationError("zone_id must be non-empty")
        _validate_grid(self.timestamps, self.resolution, f"zone {self.zone_id}")
        for ts, v in self.points:
            if not math.isfinite(v) or v < 0:
                raise ValidationError(
                    f"zone {self.zone_id}: visitors must be finite and >= 0 at {ts.isoformat()}"
                )
        if self.coverage is not None:
            object.__setattr__(self, "coverage", tuple(float(c) for c in self.coverage))
            if len(self.coverage) != len(self.points):
                raise ValidationError("coverage length must match points")
            if any(not 0.0 < c <= 1.0 for c in self.coverage):
                raise ValidationError("coverage fractions must be in (0, 1]")

    @cached_property
    def timestamps(self) -> tuple[datetime, ...]:
        return tuple(t for t, _ in self.points)

    @cached_property
    def _index(self) -> dict[datetime, float]:
        return {t: v for t, v in self.points}

    def value_at(self, ts: datetime) -> float | None:
        return self._index.get(ts)

    def coverage_at(self, ts: datetime) -> float | None:
        if ts not in self._index:
            return None
        if self.coverage is None:
            return 1.0
        return self.coverage[self.timestamps.index(ts)]

    @property
    def start(self) -> datetime:
        return self.points[0][0]

    @property
    def end(self) -> datetime:
        return self.points[-1][0]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def has_gaps(self) -> bool:
        return any(b - a != self.resolution for a, b in zip(self.timestamps, self.timestamps[1:]))

    def slice(self, start: datetime, end: datetime) -> "ZoneSeries":
        """Points with start <= t <= end. May be empty only via error."""
        kept = [i for i, (t, _) in enumerate(self.points) if start <= t <= end]
        if not kept:
            raise ValidationError(f"zone {self.zone_id}: empty slice {start}..{end}")
        cov = None if self.coverage is None else tuple(self.coverage[i] for i in kept)
        return ZoneSeries(self.zone_id, self.resolution, tuple(self.points[i] for i in kept), cov)


@dataclass(frozen=True)
class WeatherRecord:
    temp_c: float
    precip_prob_pct: float
    cloudiness: float
    windspeed_ms: float
    precip_mm: float

    def __post_init__(self):
        for name in ("temp_c", "precip_prob_pct", "cloudiness", "windspeed_ms", "precip_mm"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
        if not 0.0 <= self.precip_prob_pct <= 100.0:
            raise ValidationError(f"precip_prob_pct {self.precip_prob_pct} not in [0, 100]")
        if self.cloudiness < 0:
            raise ValidationError("cloudiness must be >= 0")
        if self.windspeed_ms < 0:
            raise ValidationError("windspeed_ms must be >= 0")
        if self.precip_mm < 0:
            raise ValidationError("precip_mm must be >= 0")

    def replace(self, **changes: float) -> "WeatherRecord":
        fields = {k: getattr(self, k) for k in WEATHER_HEADER[1:]}
        fields.update(changes)
        return WeatherRecord(**fields)


@dataclass(frozen=True)
class WeatherSeries:
    resolution: timedelta
    points: tuple[tuple[datetime, WeatherRecord], ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        _validate_grid(self.timestamps, self.resolution, "weather")

    @cached_property
    def timestamps(self) -> tuple[datetime, ...]:
        return tuple(t for t, _ in self.points)

    @cached_property
    def _index(self) -> dict[datetime, WeatherRecord]:
        return {t: r for t, r in self.points}

    def record_at(self, ts: datetime) -> WeatherRecord | None:
        return self._index.get(ts)

    @property
    def start(self) -> datetime:
        return self.points[0][0]

    @property
    def end(self) -> datetime:
        return self.points[-1][0]

    def __len__(self) -> int:
        return len(self.points)

    def slice(self, start: datetime, end: datetime) -> "WeatherSeries":
        kept = tuple(p for p in self.points if start <= p[0] <= end)
        if not kept:
            raise ValidationError(f"weather: empty slice {start}..{end}")
        return WeatherSeries(self.resolution, kept)


@dataclass(frozen=True)
class Dataset:
    """Aligned zone series, weather and holidays at one shared resolution."""

    zones: Mapping[str, ZoneSeries]
    weather: WeatherSeries
    holidays: frozenset[date]
    resolution: timedelta

    def __post_init__(self):
        object.__setattr__(self, "zones", dict(self.zones))
        object.__setattr__(self, "holidays", frozenset(self.holidays))
        if not self.zones:
            raise ValidationError("dataset needs at least one zone")
        offsets = {self.weather.start.utcoffset()}
        for zone_id, series in self.zones.items():
            if series.resolution != self.resolution:
                raise ValidationError(f"zone {zone_id} resolution differs from dataset")
            offsets.add(series.start.utcoffset())
        if self.weather.resolution != self.resolution:
            raise ValidationError("weather resolution differs from dataset")
        if len(offsets) != 1:
            raise ValidationError(f"series disagree on timezone offset: {sorted(map(str, offsets))}")

    def zone(self, zone_id: str) -> ZoneSeries:
        if zone_id not in self.zones:
            raise ValidationError(f"unknown zone {zone_id!r}; have {sorted(self.zones)}")
        return self.zones[zone_id]

    @property
    def zone_ids(self) -> list[str]:
        return sorted(self.zones)


# ---------------------------------------------------------------------------
# ingestion / serialization


def _float_field(raw: str, name: str, line: int) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ParseError(f"{name} {raw!r} is not numeric", line) from None
    if not math.isfinite(value):
        raise ParseError(f"{name} {raw!r} is not finite", line)
    return value


def ingest_visits(
    source: IO[str] | Iterable[str],
    schema: Mapping[str, str] | None = None,
    resolution: timedelta | None = None,
) -> dict[str, ZoneSeries]:
    """Read a visitor count file into one ZoneSeries per zone.

    ``schema`` maps the logical names ``timestamp``/``zone_id``/``visitors``
    to the actual column names. Rows may arrive in any order; the output is
    sorted. When ``resolution`` is None it is inferred per zone as the gcd of
    the observed spacings (a single-point zone falls back to 15 minutes).
    Timestamps are converted to the offset of the first row so one file lives
    in one timezone.
    """
    cols = {"timestamp": "timestamp", "zone_id": "zone_id", "visitors": "visitors"}
    if schema:
        cols.update(schema)
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise ParseError("missing header row", 1)
    missing = [c for c in cols.values() if c not in reader.fieldnames]
    if missing:
        raise ParseError(f"header lacks columns {missing}", 1)

    tz = None
    rows: dict[str, list[tuple[datetime, float]]] = {}
    seen: set[tuple[str, datetime]] = set()
    for line, row in enumerate(reader, start=2):
        ts = parse_timestamp(row[cols["timestamp"]] or "", line)
        _check_minute_precision(ts)
        if tz is None:
            tz = ts.tzinfo
        ts = ts.astimezone(tz)
        zone_id = (row[cols["zone_id"]] or "").strip()
        if not zone_id:
            raise ParseError("empty zone_id", line)
        visitors = _float_field(row[cols["visitors"]], "visitors", line)
        if visitors < 0:
            raise ValidationError(f"line {line}: negative visitor count {visitors}")
        key = (zone_id, ts)
        if key in seen:
            raise ConflictError(
                f"line {line}: duplicate row for zone {zone_id!r} at {ts.isoformat()}"
            )
        seen.add(key)
        rows.setdefault(zone_id, []).append((ts, visitors))

    out: dict[str, ZoneSeries] = {}
    for zone_id, pts in rows.items():
        pts.sort(key=lambda p: p[0])
        out[zone_id] = ZoneSeries(zone_id, _infer_resolution(pts, resolution), tuple(pts))
    return out


def _infer_resolution(
    pts: list[tuple[datetime, float]], resolution: timedelta | None
) -> timedelta:
    if resolution is not None:
        return resolution
    if len(pts) < 2:
        return RESOLUTION_15M
    gcd_min = 0
    for a, b in zip(pts, pts[1:]):
        delta = int((b[0] - a[0]).total_seconds() // 60)
        gcd_min = math.gcd(gcd_min, delta)
    return timedelta(minutes=gcd_min)


def serialize_visits(zones: Mapping[str, ZoneSeries], sink: IO[str]) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(VISITS_HEADER)
    for zone_id in sorted(zones):
        for ts, v in zones[zone_id].points:
            writer.writerow([ts.isoformat(timespec="minutes"), zone_id, repr(v)])


def ingest_weather(
    source: IO[str] | Iterable[str],
    schema: Mapping[str, str] | None = None,
    resolution: timedelta | None = None,
) -> WeatherSeries:
    """Read a weather file. Same conventions as ingest_visits."""
    cols = {name: name for name in WEATHER_HEADER}
    if schema:
        cols.update(schema)
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise ParseError("missing header row", 1)
    missing = [c for c in cols.values() if c not in reader.fieldnames]
    if missing:
        raise ParseError(f"header lacks columns {missing}", 1)

    tz = None
    pts: list[tuple[datetime, WeatherRecord]] = []
    seen: set[datetime] = set()
    for line, row in enumerate(reader, start=2):
        ts = parse_timestamp(row[cols["timestamp"]] or "", line)
        _check_minute_precision(ts)
        if tz is None:
            tz = ts.tzinfo
        ts = ts.astimezone(tz)
        if ts in seen:
            raise ConflictError(f"line {line}: duplicate weather row at {ts.isoformat()}")
        seen.add(ts)
        try:
            record = WeatherRecord(
                temp_c=_float_field(row[cols["temp_c"]], "temp_c", line),
                precip_prob_pct=_float_field(row[cols["precip_prob_pct"]], "precip_prob_pct", line),
                cloudiness=_float_field(row[cols["cloudiness"]], "cloudiness", line),
                windspeed_ms=_float_field(row[cols["windspeed_ms"]], "windspeed_ms", line),
                precip_mm=_float_field(row[cols["precip_mm"]], "precip_mm", line),
            )
        except ValidationError as exc:
            raise ValidationError(f"line {line}: {exc}") from None
        pts.append((ts, record))
    if not pts:
        raise ValidationError("weather file has no data rows")
    pts.sort(key=lambda p: p[0])
    res = resolution
    if res is None:
        res = _infer_resolution([(t, 0.0) for t, _ in pts], None)
    return WeatherSeries(res, tuple(pts))


def serialize_weather(series: WeatherSeries, sink: IO[str]) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(WEATHER_HEADER)
    for ts, r in series.points:
        writer.writerow(
            [
                ts.isoformat(timespec="minutes"),
                repr(r.temp_c),
                repr(r.precip_prob_pct),
                repr(r.cloudiness),
                repr(r.windspeed_ms),
                repr(r.precip_mm),
            ]
        )


def read_holidays(source: IO[str] | Iterable[str]) -> frozenset[date]:
    days = set()
    for line_no, line in enumerate(source, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            days.add(date.fromisoformat(text))
        except ValueError:
            raise ParseError(f"malformed date {text!r}", line_no) from None
    return frozenset(days)


def write_holidays(days: Iterable[date], sink: IO[str]) -> None:
    for d in sorted(days):
        sink.write(d.isoformat() + "\n")


# ---------------------------------------------------------------------------
# resampling / alignment


def resample(series: ZoneSeries, target: timedelta, mode: str = "sum") -> ZoneSeries:
    """Aggregate a series into coarser buckets.

    ``sum`` adds counts, ``mean`` averages them. Buckets with no data are
    omitted (gaps); buckets missing some sub-buckets get a coverage fraction
    below one. The target must be an integer multiple of the source
    resolution.
    """
    if mode not in ("sum", "mean"):
        raise ValidationError(f"unknown resample mode {mode!r}")
    if target % series.resolution != timedelta(0) or target < series.resolution:
        raise ValidationError(
            f"target {target} is not an integer multiple of resolution {series.resolution}"
        )
    per_bucket = target // series.resolution
    buckets: dict[datetime, list[float]] = {}
    for ts, v in series.points:
        buckets.setdefault(floor_to(ts, target), []).append(v)
    pts = []
    cov = []
    for bucket_ts in sorted(buckets):
        values = buckets[bucket_ts]
        agg = sum(values) if mode == "sum" else sum(values) / len(values)
        pts.append((bucket_ts, agg))
        cov.append(len(values) / per_bucket)
    return ZoneSeries(series.zone_id, target, tuple(pts), tuple(cov))


def resample_weather(series: WeatherSeries, target: timedelta) -> WeatherSeries:
    """Average weather records into coarser buckets (all fields by mean)."""
    if target % series.resolution != timedelta(0) or target < series.resolution:
        raise ValidationError(
            f"target {target} is not an integer multiple of resolution {series.resolution}"
        )
    buckets: dict[datetime, list[WeatherRecord]] = {}
    for ts, r in series.points:
        buckets.setdefault(floor_to(ts, target), []).append(r)
    pts = []
    for bucket_ts in sorted(buckets):
        rs = buckets[bucket_ts]
        n = len(rs)
        pts.append(
            (
                bucket_ts,
                WeatherRecord(
                    temp_c=sum(r.temp_c for r in rs) / n,
                    precip_prob_pct=sum(r.precip_prob_pct for r in rs) / n,
                    cloudiness=sum(r.cloudiness for r in rs) / n,
                    windspeed_ms=sum(r.windspeed_ms for r in rs) / n,
                    precip_mm=sum(r.precip_mm for r in rs) / n,
                ),
            )
        )
    return WeatherSeries(target, tuple(pts))


def align(
    zones: Mapping[str, ZoneSeries],
    weather: WeatherSeries,
    holidays: Iterable[date],
    resolution: timedelta,
) -> Dataset:
    """Resample everything to one resolution and trim to the common range.

    Weather is never interpolated: downstream lookups only ever match exact
    buckets, so a weather gap inside the range stays a gap.
    """
    rz = {zid: resample(s, resolution, "sum") for zid, s in zones.items()}
    rw = resample_weather(weather, resolution)
    starts = {zid: s.start for zid, s in rz.items()}
    ends = {zid: s.end for zid, s in rz.items()}
    lo = max(list(starts.values()) + [rw.start])
    hi = min(list(ends.values()) + [rw.end])
    if lo > hi:
        ranges = [f"weather {rw.start.isoformat()}..{rw.end.isoformat()}"] + [
            f"{zid} {starts[zid].isoformat()}..{ends[zid].isoformat()}" for zid in sorted(rz)
        ]
        raise AlignmentError("series do not overlap: " + "; ".join(ranges))
    return Dataset(
        zones={zid: s.slice(lo, hi) for zid, s in rz.items()},
        weather=rw.slice(lo, hi),
        holidays=frozenset(holidays),
        resolution=resolution,
    )
