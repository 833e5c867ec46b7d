"""Risk side of the pipeline: crowding bands, aggravating factors, categories.

Forecasted crowdedness is ranked against a historical reference distribution
for the same zone and hour-of-week; the resulting band is combined with a
weighted aggravation score through a monotone lookup matrix. The matrix is a
documented trigger-value baseline; swap in any object with the same
``classify`` surface to replace it with a learned classifier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import IO, Mapping

import numpy as np

from .errors import ConfigError, ValidationError
from .timeseries import WeatherRecord, ZoneSeries

CROWDING_BANDS = ("low", "moderate", "high", "extreme")
AGGRAVATION_BANDS = ("low", "moderate", "high")
CATEGORIES = ("low", "elevated", "high", "critical")

DEFAULT_MATRIX: dict[str, tuple[str, str, str]] = {
    # crowding band -> category per aggravation band (low, moderate, high)
    "low": ("low", "low", "elevated"),
    "moderate": ("low", "elevated", "high"),
    "high": ("elevated", "high", "critical"),
    "extreme": ("high", "critical", "critical"),
}


@dataclass(frozen=True)
class CrowdingLevel:
    zone_id: str
    timestamp: datetime
    value: float
    percentile: float
    band: str
    fallback: bool = False  # True when the hour-of-week bucket was empty


@dataclass(frozen=True)
class AggravatingFactors:
    scores: Mapping[str, float]
    weights: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "scores", dict(self.scores))
        object.__setattr__(self, "weights", dict(self.weights))
        for name, s in self.scores.items():
            if not 0.0 <= s <= 1.0:
                raise ValidationError(f"factor {name!r} score {s} not in [0, 1]")
            if name not in self.weights:
                raise ValidationError(f"factor {name!r} has no weight")
        for name, w in self.weights.items():
            if w < 0:
                raise ValidationError(f"factor {name!r} weight {w} must be >= 0")
        if sum(self.weights[n] for n in self.scores) <= 0:
            raise ValidationError("total factor weight must be positive")


@dataclass(frozen=True)
class RiskAssessment:
    zone_id: str
    timestamp: datetime
    crowding: CrowdingLevel
    aggravation: float
    category: str
    explanation: tuple[str, ...]


@dataclass
class ReferenceDistribution:
    """Historical values per hour-of-week bucket, with an all-hours fallback."""

    zone_id: str
    by_hour_of_week: dict[int, np.ndarray]
    all_values: np.ndarray

    @classmethod
    def from_series(cls, series: ZoneSeries) -> "ReferenceDistribution":
        buckets: dict[int, list[float]] = {}
        for ts, v in series.points:
            buckets.setdefault(ts.weekday() * 24 + ts.hour, []).append(v)
        return cls(
            zone_id=series.zone_id,
            by_hour_of_week={k: np.array(vs) for k, vs in buckets.items()},
            all_values=np.array([v for _, v in series.points]),
        )


@dataclass(frozen=True)
class RiskConfig:
    crowding_cuts: tuple[float, float, float] = (50.0, 80.0, 95.0)
    aggravation_cuts: tuple[float, float] = (1 / 3, 2 / 3)
    matrix: Mapping[str, tuple[str, str, str]] = field(
        default_factory=lambda: dict(DEFAULT_MATRIX)
    )
    factor_weights: Mapping[str, float] = field(
        default_factory=lambda: {"weather_extremity": 1.0}
    )
    comfort_temp_c: float = 24.0
    temp_extremity_span_c: float = 12.0

    def __post_init__(self):
        object.__setattr__(self, "matrix", {k: tuple(v) for k, v in self.matrix.items()})
        object.__setattr__(self, "factor_weights", dict(self.factor_weights))
        if list(self.crowding_cuts) != sorted(set(self.crowding_cuts)):
            raise ConfigError("crowding cut points must be strictly increasing")
        if list(self.aggravation_cuts) != sorted(set(self.aggravation_cuts)):
            raise ConfigError("aggravation cut points must be strictly increasing")
        _validate_matrix(self.matrix)
        if self.temp_extremity_span_c <= 0:
            raise ConfigError("temp_extremity_span_c must be positive")

    def to_dict(self) -> dict:
        return {
            "crowding_cuts": list(self.crowding_cuts),
            "aggravation_cuts": list(self.aggravation_cuts),
            "matrix": {k: list(v) for k, v in self.matrix.items()},
            "factor_weights": dict(self.factor_weights),
            "comfort_temp_c": self.comfort_temp_c,
            "temp_extremity_span_c": self.temp_extremity_span_c,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RiskConfig":
        kwargs = {}
        for key in ("crowding_cuts", "aggravation_cuts"):
            if key in doc:
                kwargs[key] = tuple(doc[key])
        if "matrix" in doc:
            kwargs["matrix"] = {k: tuple(v) for k, v in doc["matrix"].items()}
        for key in ("factor_weights", "comfort_temp_c", "temp_extremity_span_c"):
            if key in doc:
                kwargs[key] = doc[key]
        return cls(**kwargs)


def _validate_matrix(matrix: Mapping[str, tuple[str, ...]]) -> None:
    if set(matrix) != set(CROWDING_BANDS):
        raise ConfigError(f"matrix must define exactly bands {CROWDING_BANDS}")
    rank = {c: i for i, c in enumerate(CATEGORIES)}
    for band, row in matrix.items():
        if len(row) != len(AGGRAVATION_BANDS):
            raise ConfigError(f"matrix row {band!r} must have {len(AGGRAVATION_BANDS)} cells")
        for cat in row:
            if cat not in rank:
                raise ConfigError(f"unknown category {cat!r} in matrix row {band!r}")
        if any(rank[a] > rank[b] for a, b in zip(row, row[1:])):
            raise ConfigError(f"matrix row {band!r} is not monotone in aggravation")
    for a, b in zip(CROWDING_BANDS, CROWDING_BANDS[1:]):
        if any(rank[x] > rank[y] for x, y in zip(matrix[a], matrix[b])):
            raise ConfigError(f"matrix is not monotone from band {a!r} to {b!r}")


def load_risk_config(source: IO[str]) -> RiskConfig:
    try:
        doc = json.load(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"risk config is not valid JSON: {exc}") from None
    return RiskConfig.from_dict(doc)


def crowding_level(
    zone_id: str,
    timestamp: datetime,
    value: float,
    reference: ReferenceDistribution,
    cuts: tuple[float, float, float] = (50.0, 80.0, 95.0),
) -> CrowdingLevel:
    """Percentile of a forecast against the zone's history for that hour-of-week.

    Percentile = share of reference values <= value, in percent. An empty
    hour-of-week bucket falls back to the zone's all-hours distribution and
    flags the result.
    """
    bucket = reference.by_hour_of_week.get(timestamp.weekday() * 24 + timestamp.hour)
    fallback = bucket is None or len(bucket) == 0
    ref = reference.all_values if fallback else bucket
    if len(ref) == 0:
        raise ValidationError(f"zone {zone_id}: empty reference distribution")
    percentile = 100.0 * float(np.count_nonzero(ref <= value)) / len(ref)
    band = CROWDING_BANDS[int(np.searchsorted(np.asarray(cuts), percentile, side="right"))]
    return CrowdingLevel(zone_id, timestamp, float(value), percentile, band, fallback)


def aggravation_score(factors: AggravatingFactors) -> float:
    """Weighted arithmetic mean of factor scores, in [0, 1]."""
    total = sum(factors.weights[name] for name in factors.scores)
    if total <= 0:
        raise ValidationError("total factor weight must be positive")
    s = sum(factors.scores[name] * factors.weights[name] for name in factors.scores)
    return s / total


def aggravation_band(score: float, cuts: tuple[float, float]) -> str:
    return AGGRAVATION_BANDS[int(np.searchsorted(np.asarray(cuts), score, side="right"))]


def weather_extremity(
    record: WeatherRecord, comfort_temp_c: float = 24.0, span_c: float = 12.0
) -> float:
    """Scaled exceedance of temperature above the comfort threshold, in [0, 1]."""
    return min(1.0, max(0.0, (record.temp_c - comfort_temp_c) / span_c))


def classify_risk(
    crowding: CrowdingLevel,
    aggravation: float,
    config: RiskConfig = RiskConfig(),
    factors: AggravatingFactors | None = None,
) -> RiskAssessment:
    """Matrix lookup of (crowding band, aggravation band) with an explanation.

    Pure: same inputs, same assessment. ``factors``, when given, only enrich
    the explanation with the top weighted contributors.
    """
    if not 0.0 <= aggravation <= 1.0:
        raise ValidationError(f"aggravation {aggravation} not in [0, 1]")
    agg_band = aggravation_band(aggravation, config.aggravation_cuts)
    category = config.matrix[crowding.band][AGGRAVATION_BANDS.index(agg_band)]
    explanation = [
        f"crowding {crowding.band} (percentile {crowding.percentile:.1f}"
        + (", all-hours fallback)" if crowding.fallback else ")"),
        f"aggravation {aggravation:.2f} -> band {agg_band}",
    ]
    if factors is not None:
        ranked = sorted(
            factors.scores.items(),
            key=lambda kv: (-kv[1] * factors.weights[kv[0]], kv[0]),
        )
        for name, score in ranked[:3]:
            explanation.append(
                f"factor {name}={score:.2f} (weight {factors.weights[name]:g})"
            )
    explanation.append(f"matrix[{crowding.band}][{agg_band}] -> {category}")
    return RiskAssessment(
        zone_id=crowding.zone_id,
        timestamp=crowding.timestamp,
        crowding=crowding,
        aggravation=float(aggravation),
        category=category,
        explanation=tuple(explanation),
    )
