"""Application configuration: one JSON file drives CLI and HTTP service.

Resolution order for the config path: explicit ``--config`` flag, the
``CROWDCAST_CONFIG`` environment variable, then built-in defaults. Relative
data/registry/output paths are resolved against the config file's directory
(or the working directory when no file is used).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path

from .boosting import EarlyStopping, GbrtParams
from .errors import ConfigError
from .risk import RiskConfig
from .timeseries import parse_resolution

ENV_CONFIG = "CROWDCAST_CONFIG"

DEFAULT_LAGS_BY_RESOLUTION = {
    "1h": (1, 2, 3, 24, 48, 168),
    "1d": (1, 2, 3, 7),
    "15m": (1, 2, 3, 4, 96, 192),
}


@dataclass(frozen=True)
class GeneratorSettings:
    days: int = 120
    seed: int = 7
    forecast_margin_days: int = 14
    noise_sigma: float = 600.0
    hourly_noise_scale: float = 1.0
    saturation_knee_c: float | None = None
    momentum_rho: float = 0.0
    momentum_sigma: float = 0.0


@dataclass(frozen=True)
class ServerSettings:
    host: str = "127.0.0.1"
    port: int = 8765
    static_dir: str | None = None


@dataclass(frozen=True)
class AppConfig:
    base_dir: Path = field(default_factory=Path.cwd)
    data_dir: str = "data"
    registry_dir: str = "registry"
    output_dir: str = "out"
    resolution: str = "1h"
    lags: tuple[int, ...] | None = None
    gbrt: GbrtParams = GbrtParams()
    min_variance: float = 1e-12
    min_abs_corr: float = 0.05
    mape_epsilon: float = 1.0
    horizon_default: str = "6d"
    risk: RiskConfig = RiskConfig()
    static_factor_scores: dict = field(default_factory=dict)
    generator: GeneratorSettings = GeneratorSettings()
    server: ServerSettings = ServerSettings()

    @property
    def resolution_delta(self) -> timedelta:
        return parse_resolution(self.resolution)

    @property
    def lag_tuple(self) -> tuple[int, ...]:
        if self.lags is not None:
            return self.lags
        try:
            return DEFAULT_LAGS_BY_RESOLUTION[self.resolution]
        except KeyError:
            raise ConfigError(
                f"no default lags for resolution {self.resolution!r}; set 'lags'"
            ) from None

    def path(self, name: str) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def data_path(self) -> Path:
        return self.path(self.data_dir)

    @property
    def registry_path(self) -> Path:
        return self.path(self.registry_dir)

    @property
    def output_path(self) -> Path:
        return self.path(self.output_dir)


def _gbrt_from_dict(doc: dict) -> GbrtParams:
    es = None
    if doc.get("early_stopping"):
        es = EarlyStopping(
            validation_fraction=doc["early_stopping"]["validation_fraction"],
            patience=doc["early_stopping"]["patience"],
        )
    return GbrtParams(
        max_depth=doc.get("max_depth", 10),
        n_estimators=doc.get("n_estimators", 15),
        learning_rate=doc.get("learning_rate", 0.3),
        min_samples_leaf=doc.get("min_samples_leaf", 1),
        early_stopping=es,
    )


def config_from_dict(doc: dict, base_dir: Path) -> AppConfig:
    kwargs: dict = {"base_dir": base_dir}
    for key in (
        "data_dir", "registry_dir", "output_dir", "resolution", "min_variance",
        "min_abs_corr", "mape_epsilon", "horizon_default", "static_factor_scores",
    ):
        if key in doc:
            kwargs[key] = doc[key]
    if "lags" in doc:
        kwargs["lags"] = tuple(int(k) for k in doc["lags"])
    if "gbrt" in doc:
        kwargs["gbrt"] = _gbrt_from_dict(doc["gbrt"])
    if "risk" in doc:
        kwargs["risk"] = RiskConfig.from_dict(doc["risk"])
    if "generator" in doc:
        g = doc["generator"]
        kwargs["generator"] = GeneratorSettings(
            days=g.get("days", 120),
            seed=g.get("seed", 7),
            forecast_margin_days=g.get("forecast_margin_days", 14),
            noise_sigma=g.get("noise_sigma", 600.0),
            hourly_noise_scale=g.get("hourly_noise_scale", 1.0),
            saturation_knee_c=g.get("saturation_knee_c"),
            momentum_rho=g.get("momentum_rho", 0.0),
            momentum_sigma=g.get("momentum_sigma", 0.0),
        )
    if "server" in doc:
        s = doc["server"]
        kwargs["server"] = ServerSettings(
            host=s.get("host", "127.0.0.1"),
            port=s.get("port", 8765),
            static_dir=s.get("static_dir"),
        )
    unknown = set(doc) - {
        "data_dir", "registry_dir", "output_dir", "resolution", "lags", "gbrt",
        "min_variance", "min_abs_corr", "mape_epsilon", "horizon_default", "risk",
        "static_factor_scores", "generator", "server",
    }
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return AppConfig(**kwargs)


def load_config(path: str | os.PathLike | None = None) -> AppConfig:
    """Load config from the given path, the env override, or defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG) or None
    if path is None:
        return AppConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(doc, p.resolve().parent)
