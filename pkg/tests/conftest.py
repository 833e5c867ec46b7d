from datetime import date, datetime, time, timedelta, timezone

import pytest

from crowdcast.timeseries import (
    RESOLUTION_1H,
    Dataset,
    WeatherRecord,
    WeatherSeries,
    ZoneSeries,
)

TZ = timezone(timedelta(hours=2))
T0 = datetime(2021, 4, 1, 0, 0, tzinfo=TZ)


def ts(hours: float) -> datetime:
    return T0 + timedelta(hours=hours)


def make_zone(values, zone_id="pier", start=T0, res=RESOLUTION_1H, skip=()):
    """Series from a value list; indices in ``skip`` become gaps."""
    points = tuple(
        (start + i * res, float(v)) for i, v in enumerate(values) if i not in skip
    )
    return ZoneSeries(zone_id, res, points)


def make_weather(n, start=T0, res=RESOLUTION_1H, temp=15.0, prob=20.0, cloud=2.0,
                 wind=4.0, mm=0.0, temp_fn=None):
    points = []
    for i in range(n):
        t = temp_fn(i) if temp_fn is not None else temp
        points.append(
            (
                start + i * res,
                WeatherRecord(
                    temp_c=t, precip_prob_pct=prob, cloudiness=cloud,
                    windspeed_ms=wind, precip_mm=mm,
                ),
            )
        )
    return WeatherSeries(res, tuple(points))


def make_dataset(values, zone_id="pier", skip=(), holidays=frozenset(), **weather_kw):
    series = make_zone(values, zone_id=zone_id, skip=skip)
    weather = make_weather(len(values), **weather_kw)
    return Dataset(
        zones={zone_id: series},
        weather=weather,
        holidays=holidays,
        resolution=RESOLUTION_1H,
    )


@pytest.fixture
def tiny_dataset():
    return make_dataset([10.0, 20.0, 30.0, 40.0])
