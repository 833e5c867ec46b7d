"""Error metrics, multi-step error profiles and model comparison."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .boosting import GbrtParams, fit_gbrt
from .errors import CoverageError, CrowdcastError, ValidationError
from .features import FeatureMatrix, LagSpec, build_matrix, filter_features, split_matrix
from .forecasting import (
    ForecastResult,
    HorizonSpec,
    Predictor,
    Trainer,
    forecast_recursive,
)
from .linreg import fit_ols
from .timeseries import Dataset, WeatherSeries, ZoneSeries


@dataclass(frozen=True)
class Metrics:
    mae: float
    rmse: float
    mape: float | None  # None when every target was excluded as too small
    n_used: int
    n_excluded_zero: int


def compute_metrics(y: np.ndarray, yhat: np.ndarray, mape_epsilon: float = 1.0) -> Metrics:
    """MAE / RMSE / MAPE with small-denominator rows excluded from MAPE.

    Rows with |y| <= mape_epsilon would blow up the percentage error, so they
    are dropped from MAPE (only) and counted in ``n_excluded_zero``.
    """
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1 or len(y) < 1:
        raise ValidationError("compute_metrics needs two equal-length non-empty vectors")
    err = np.abs(y - yhat)
    mae = float(np.mean(err))
    rmse = float(np.sqrt(np.mean((y - yhat) ** 2)))
    usable = np.abs(y) > mape_epsilon
    n_used = int(np.count_nonzero(usable))
    mape = None
    if n_used:
        mape = float(100.0 * np.mean(err[usable] / np.abs(y[usable])))
    return Metrics(mae=mae, rmse=rmse, mape=mape, n_used=n_used,
                   n_excluded_zero=int(len(y) - n_used))


@dataclass(frozen=True)
class StepErrorProfile:
    """Mean absolute error per horizon step (index 0 = one step ahead)."""

    mae_by_step: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.mae_by_step)

    def __getitem__(self, step: int) -> float:
        """1-based step lookup, matching 'step k ahead' wording."""
        if not 1 <= step <= len(self.mae_by_step):
            raise IndexError(f"step {step} outside 1..{len(self.mae_by_step)}")
        return self.mae_by_step[step - 1]


def step_error_profile(
    forecasts: list[ForecastResult], truth: ZoneSeries
) -> StepErrorProfile:
    """Average absolute error per step over rolling-origin forecasts.

    Every forecast step must have a matching observation; raw (unclamped)
    predictions are compared so clamping cannot hide bias.
    """
    if not forecasts:
        raise ValidationError("need at least one forecast")
    horizon = len(forecasts[0].steps)
    if any(len(f.steps) != horizon for f in forecasts):
        raise ValidationError("forecasts disagree on horizon length")
    gaps = [
        step.timestamp
        for f in forecasts
        for step in f.steps
        if truth.value_at(step.timestamp) is None
    ]
    if gaps:
        raise CoverageError(
            "truth missing at " + ", ".join(t.isoformat() for t in gaps[:5])
            + ("..." if len(gaps) > 5 else "")
        )
    errs = np.zeros(horizon)
    for f in forecasts:
        for k, step in enumerate(f.steps):
            errs[k] += abs(truth.value_at(step.timestamp) - step.raw)
    return StepErrorProfile(tuple(errs / len(forecasts)))


def rolling_origin_forecasts(
    model: Predictor,
    series: ZoneSeries,
    exog: WeatherSeries,
    lag: LagSpec,
    h: HorizonSpec,
    start: datetime,
    n_origins: int,
    stride: int | None = None,
    holidays: frozenset = frozenset(),
) -> list[ForecastResult]:
    """Recursive forecasts from successive origins at/after ``start``.

    The default stride equals the horizon, i.e. non-overlapping evaluation
    windows. Exogenous inputs come from the observed weather, standing in for
    perfect forecasts.
    """
    stride = h.steps if stride is None else stride
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    stamps = series.timestamps
    origins = []
    i = next((i for i, t in enumerate(stamps) if t >= start), None)
    if i is None:
        raise ValidationError("start is beyond the series")
    while len(origins) < n_origins and i + h.steps < len(stamps):
        origins.append(i)
        i += stride
    if len(origins) < n_origins:
        raise CoverageError(
            f"series supports only {len(origins)} origins (wanted {n_origins})"
        )
    out = []
    for i in origins:
        history = ZoneSeries(series.zone_id, series.resolution, series.points[: i + 1])
        out.append(forecast_recursive(model, history, exog, lag, h, holidays))
    return out


@dataclass(frozen=True)
class ZoneComparison:
    zone_id: str
    mlr_mae: float
    gbrt_mae: float
    improvement_pct: float  # 100 * (mlr - gbrt) / mlr
    mlr_r_squared: float
    error: str | None = None


@dataclass(frozen=True)
class ComparisonReport:
    zones: tuple[ZoneComparison, ...]
    error_samples: dict  # zone -> {"mlr": ndarray, "gbrt": ndarray} of |error| on test rows

    @property
    def average_improvement_pct(self) -> float:
        vals = [z.improvement_pct for z in self.zones if z.error is None]
        if not vals:
            raise ValidationError("no zone produced a comparison")
        return float(np.mean(vals))

    def to_text(self) -> str:
        lines = ["zone\tmlr_mae\tgbrt_mae\timprovement_pct\tmlr_r_squared\terror"]
        for z in self.zones:
            lines.append(
                f"{z.zone_id}\t{z.mlr_mae:.6g}\t{z.gbrt_mae:.6g}\t{z.improvement_pct:.6g}"
                f"\t{z.mlr_r_squared:.6g}\t{z.error or ''}"
            )
        return "\n".join(lines) + "\n"


def make_mlr_trainer(min_variance: float = 1e-12, min_abs_corr: float = 0.0) -> Trainer:
    """OLS trainer with a variance guard so constant columns cannot sink the fit."""

    def train(m: FeatureMatrix) -> Predictor:
        filtered, _ = filter_features(m, min_variance=min_variance, min_abs_corr=min_abs_corr)
        return fit_ols(filtered)

    return train


def make_gbrt_trainer(params: GbrtParams = GbrtParams(), seed: int = 0) -> Trainer:
    def train(m: FeatureMatrix) -> Predictor:
        return fit_gbrt(m, params, seed)

    return train


def predict_matrix(model: Predictor, m: FeatureMatrix) -> np.ndarray:
    """Predict every row, selecting the model's columns by name."""
    X = m.select(model.column_names)
    batch = getattr(model, "predict", None)
    if callable(batch):
        return np.asarray(batch(X), dtype=float)
    return np.array([model.predict_row(r) for r in X])


def compare_models(
    ds: Dataset,
    zones: list[str],
    trainers: tuple[Trainer, Trainer],
    split: datetime,
    lag: LagSpec,
    mape_epsilon: float = 1.0,
) -> ComparisonReport:
    """Fit both trainers per zone on identical train rows; score test rows.

    ``trainers`` is (benchmark, challenger) = (mlr, gbrt). A zone that cannot
    be fitted is reported with its error message instead of failing the whole
    comparison.
    """
    mlr_trainer, gbrt_trainer = trainers
    results = []
    samples: dict[str, dict[str, np.ndarray]] = {}
    for zone_id in zones:
        try:
            matrix = build_matrix(ds, zone_id, lag)
            train, test = split_matrix(matrix, split)
            mlr = mlr_trainer(train)
            gbrt = gbrt_trainer(train)
            mlr_pred = predict_matrix(mlr, test)
            gbrt_pred = predict_matrix(gbrt, test)
            mlr_m = compute_metrics(test.target, mlr_pred, mape_epsilon)
            gbrt_m = compute_metrics(test.target, gbrt_pred, mape_epsilon)
            improvement = (
                100.0 * (mlr_m.mae - gbrt_m.mae) / mlr_m.mae if mlr_m.mae > 0 else 0.0
            )
            results.append(
                ZoneComparison(
                    zone_id=zone_id,
                    mlr_mae=mlr_m.mae,
                    gbrt_mae=gbrt_m.mae,
                    improvement_pct=improvement,
                    mlr_r_squared=getattr(mlr, "r_squared", float("nan")),
                )
            )
            samples[zone_id] = {
                "mlr": np.abs(test.target - mlr_pred),
                "gbrt": np.abs(test.target - gbrt_pred),
            }
        except CrowdcastError as exc:
            results.append(
                ZoneComparison(zone_id, float("nan"), float("nan"), float("nan"),
                               float("nan"), error=str(exc))
            )
    return ComparisonReport(tuple(results), samples)
