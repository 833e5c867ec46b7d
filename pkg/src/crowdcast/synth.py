"""Seeded synthetic visitor/weather generator.

Daily latent totals per zone follow a linear rule in daily weather aggregates
and a weekend indicator (the shipped coefficients are the calibration
targets for the regression benchmark), optionally with a saturating
temperature response, an autoregressive momentum term, and sparse
event spikes for event-driven zones. Hourly counts spread the latent total
over a fixed within-day profile with variance-equals-mean noise, clamped at
zero. Everything is reproducible from (config, seed); each zone draws from
its own seed substream so parallel generation cannot reorder randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone

import numpy as np

from .errors import ValidationError
from .timeseries import (
    RESOLUTION_1H,
    Dataset,
    WeatherRecord,
    WeatherSeries,
    ZoneSeries,
)


def _default_profile() -> tuple[float, ...]:
    hours = np.arange(24)
    w = np.exp(-(((hours - 14.5) / 4.0) ** 2)) + 0.02
    w = w / w.sum()
    return tuple(float(x) for x in w)


DEFAULT_DAILY_PROFILE = _default_profile()


@dataclass(frozen=True)
class ZoneSpec:
    zone_id: str
    base_scale: float
    event_driven: bool = False

    def __post_init__(self):
        if self.base_scale <= 0:
            raise ValidationError(f"zone {self.zone_id}: base_scale must be positive")


@dataclass(frozen=True)
class Coefficients:
    """Per-day visitor effect of each driver (daily mean units)."""

    temp: float = 225.0
    precip_prob: float = -10.0
    cloudiness: float = -29.0
    windspeed: float = -290.0
    weekend: float = 3246.0

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.temp, self.precip_prob, self.cloudiness, self.windspeed, self.weekend)


@dataclass(frozen=True)
class Saturation:
    """Saturating temperature response: slope stays `temp` near 0 degC but the
    effect levels off around the knee, so a straight line underfits warm days."""

    knee_c: float = 10.0

    def __post_init__(self):
        if self.knee_c <= 0:
            raise ValidationError("knee_c must be positive")


@dataclass(frozen=True)
class GeneratorConfig:
    zones: tuple[ZoneSpec, ...]
    days: int
    seed: int
    coefficients: Coefficients = Coefficients()
    noise_sigma: float = 600.0
    daily_profile: tuple[float, ...] = DEFAULT_DAILY_PROFILE
    nonlinearity: Saturation | None = None
    hourly_noise_scale: float = 1.0
    momentum_rho: float = 0.0
    momentum_sigma: float = 0.0
    event_rate: float = 0.06
    event_scale: float = 4.0
    start: date = date(2021, 4, 1)
    utc_offset_hours: int = 2

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))
        object.__setattr__(self, "daily_profile", tuple(float(x) for x in self.daily_profile))
        if not self.zones:
            raise ValidationError("need at least one zone")
        if self.days < 1:
            raise ValidationError("days must be >= 1")
        if self.noise_sigma < 0 or self.hourly_noise_scale < 0 or self.momentum_sigma < 0:
            raise ValidationError("noise scales must be >= 0")
        if not 0.0 <= self.momentum_rho < 1.0:
            raise ValidationError("momentum_rho must be in [0, 1)")
        if len(self.daily_profile) != 24 or any(w < 0 for w in self.daily_profile):
            raise ValidationError("daily_profile needs 24 non-negative weights")
        if abs(sum(self.daily_profile) - 1.0) > 1e-9:
            raise ValidationError("daily_profile weights must sum to 1")
        if not 0.0 <= self.event_rate <= 1.0:
            raise ValidationError("event_rate must be in [0, 1]")

    @property
    def tz(self) -> timezone:
        return timezone(timedelta(hours=self.utc_offset_hours))


@dataclass(frozen=True)
class SyntheticDataset:
    dataset: Dataset
    latent_daily: dict[str, tuple[tuple[date, float], ...]]


def default_zones() -> tuple[ZoneSpec, ...]:
    """The 16 shipped beach zones: piers, boulevards, beaches, access points."""
    return (
        ZoneSpec("pier", 20000.0),
        ZoneSpec("boulevard_noord", 16000.0),
        ZoneSpec("boulevard_midden", 17500.0),
        ZoneSpec("boulevard_zuid", 15000.0),
        ZoneSpec("strand_noord", 12000.0),
        ZoneSpec("strand_centraal", 14000.0),
        ZoneSpec("strand_zuid", 11000.0),
        ZoneSpec("beach_stadium", 6500.0, event_driven=True),
        ZoneSpec("ov_kurhaus", 19000.0),
        ZoneSpec("ov_strandweg", 13000.0),
        ZoneSpec("ov_zwarte_pad", 9000.0),
        ZoneSpec("toegang_kurhaus", 15500.0),
        ZoneSpec("toegang_noord", 8000.0),
        ZoneSpec("toegang_zuid", 7500.0),
        ZoneSpec("haven", 7000.0),
        ZoneSpec("duinpark", 6000.0),
    )


def default_holidays(start: date, days: int) -> frozenset[date]:
    """Fixed-date public holidays within the generated range."""
    end = start + timedelta(days=days)
    out = set()
    for year in range(start.year, end.year + 1):
        for month, day in ((1, 1), (4, 27), (5, 5), (12, 25), (12, 26)):
            d = date(year, month, day)
            if start <= d < end:
                out.add(d)
    return frozenset(out)


def _ar1(rng: np.random.Generator, n: int, rho: float, sigma: float) -> np.ndarray:
    shocks = rng.normal(0.0, sigma, size=n)
    out = np.empty(n)
    prev = 0.0
    for i in range(n):
        prev = rho * prev + shocks[i]
        out[i] = prev
    return out


def generate_weather(
    days: int,
    seed: int,
    noise_sigma: float = 1.0,
    start: date = date(2021, 4, 1),
    utc_offset_hours: int = 2,
) -> WeatherSeries:
    """Hourly weather: seasonal + diurnal sinusoids plus AR(1) disturbances.

    With ``noise_sigma`` 0 the output is the smooth deterministic part and is
    identical across seeds. All fields respect their range invariants.
    """
    if days < 1:
        raise ValidationError("days must be >= 1")
    if noise_sigma < 0:
        raise ValidationError("noise_sigma must be >= 0")
    tz = timezone(timedelta(hours=utc_offset_hours))
    n = days * 24
    t0 = datetime.combine(start, time(0), tzinfo=tz)
    stamps = [t0 + i * RESOLUTION_1H for i in range(n)]
    doy = np.array([ts.timetuple().tm_yday for ts in stamps], dtype=float)
    hour = np.array([ts.hour for ts in stamps], dtype=float)

    rng = np.random.default_rng(seed)
    temp_n = _ar1(rng, n, 0.9, 0.8 * noise_sigma)
    wind_n = _ar1(rng, n, 0.85, 1.0 * noise_sigma)
    cloud_n = _ar1(rng, n, 0.8, 1.2 * noise_sigma)
    prob_n = _ar1(rng, n, 0.8, 10.0 * noise_sigma)

    temp = (
        11.0
        + 8.0 * np.sin(2 * math.pi * (doy - 100.0) / 365.25)
        + 3.5 * np.sin(2 * math.pi * (hour - 9.0) / 24.0)
        + temp_n
    )
    wind = np.clip(
        5.5 + 2.5 * np.sin(2 * math.pi * (doy - 280.0) / 365.25) + wind_n, 0.0, 30.0
    )
    cloud = np.clip(
        4.0 + 2.0 * np.sin(2 * math.pi * (doy - 320.0) / 365.25) + cloud_n, 0.0, 8.0
    )
    prob = np.clip(12.5 * cloud + prob_n, 0.0, 100.0)
    mm = np.clip((prob - 60.0) / 40.0, 0.0, None) * 1.5

    points = tuple(
        (
            stamps[i],
            WeatherRecord(
                temp_c=float(temp[i]),
                precip_prob_pct=float(prob[i]),
                cloudiness=float(cloud[i]),
                windspeed_ms=float(wind[i]),
                precip_mm=float(mm[i]),
            ),
        )
        for i in range(n)
    )
    return WeatherSeries(RESOLUTION_1H, points)


def _daily_weather_means(
    weather: WeatherSeries, start: date, days: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    by_day: dict[date, list[WeatherRecord]] = {}
    for ts, rec in weather.points:
        by_day.setdefault(ts.date(), []).append(rec)
    temps, probs, clouds, winds = [], [], [], []
    for i in range(days):
        d = start + timedelta(days=i)
        recs = by_day.get(d, [])
        if len(recs) != 24:
            raise ValidationError(f"weather does not fully cover {d.isoformat()}")
        temps.append(np.mean([r.temp_c for r in recs]))
        probs.append(np.mean([r.precip_prob_pct for r in recs]))
        clouds.append(np.mean([r.cloudiness for r in recs]))
        winds.append(np.mean([r.windspeed_ms for r in recs]))
    return (np.array(temps), np.array(probs), np.array(clouds), np.array(winds))


def generate_visits(cfg: GeneratorConfig, weather: WeatherSeries) -> SyntheticDataset:
    """Generate hourly zone series whose daily totals follow the latent rule.

    Latent daily total = base + temp effect + precip/cloud/wind terms +
    weekend term (+ momentum, + event spikes) + Gaussian noise; hourly count =
    max(0, latent * profile[hour] + sqrt(mean)-scaled noise).
    """
    days = cfg.days
    start = cfg.start
    temps, probs, clouds, winds = _daily_weather_means(weather, start, days)
    dates = [start + timedelta(days=i) for i in range(days)]
    weekend = np.array([1.0 if d.weekday() in (5, 6) else 0.0 for d in dates])
    coef = cfg.coefficients
    if cfg.nonlinearity is None:
        temp_effect = coef.temp * temps
    else:
        knee = cfg.nonlinearity.knee_c
        temp_effect = coef.temp * knee * np.tanh(temps / knee)
    exog_effect = (
        temp_effect
        + coef.precip_prob * probs
        + coef.cloudiness * clouds
        + coef.windspeed * winds
        + coef.weekend * weekend
    )

    tz = cfg.tz
    profile = np.array(cfg.daily_profile)
    zones: dict[str, ZoneSeries] = {}
    latents: dict[str, tuple[tuple[date, float], ...]] = {}
    for zi, zone in enumerate(cfg.zones):
        rng = np.random.default_rng([cfg.seed, zi])
        latent = zone.base_scale + exog_effect
        if cfg.noise_sigma > 0:
            latent = latent + rng.normal(0.0, cfg.noise_sigma, size=days)
        if cfg.momentum_sigma > 0:
            latent = latent + _ar1(rng, days, cfg.momentum_rho, cfg.momentum_sigma)
        if zone.event_driven:
            mask = rng.random(days) < cfg.event_rate
            sizes = rng.uniform(0.5, 1.5, size=days) * cfg.event_scale * zone.base_scale
            latent = latent + mask * sizes
        hourly_mean = np.clip(np.outer(latent, profile), 0.0, None).ravel()
        if cfg.hourly_noise_scale > 0:
            noise = rng.normal(0.0, 1.0, size=hourly_mean.size)
            counts = np.clip(
                hourly_mean + cfg.hourly_noise_scale * np.sqrt(hourly_mean) * noise,
                0.0,
                None,
            )
        else:
            counts = hourly_mean
        t0 = datetime.combine(start, time(0), tzinfo=tz)
        points = tuple(
            (t0 + i * RESOLUTION_1H, float(counts[i])) for i in range(days * 24)
        )
        zones[zone.zone_id] = ZoneSeries(zone.zone_id, RESOLUTION_1H, points)
        latents[zone.zone_id] = tuple(zip(dates, (float(v) for v in latent)))

    end_ts = datetime.combine(start, time(0), tzinfo=tz) + (days * 24 - 1) * RESOLUTION_1H
    dataset = Dataset(
        zones=zones,
        weather=weather.slice(datetime.combine(start, time(0), tzinfo=tz), end_ts),
        holidays=default_holidays(start, days),
        resolution=RESOLUTION_1H,
    )
    return SyntheticDataset(dataset=dataset, latent_daily=latents)
