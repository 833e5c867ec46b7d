"""Command-line interface: generate, train, evaluate, forecast, risk, serve, plot."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .boosting import fit_gbrt
from .config import AppConfig, load_config
from .errors import CrowdcastError, ValidationError
from .evaluation import (
    compare_models,
    compute_metrics,
    make_gbrt_trainer,
    make_mlr_trainer,
    predict_matrix,
    rolling_origin_forecasts,
    step_error_profile,
)
from .features import (
    FeatureMatrix,
    LagSpec,
    build_daily_regression,
    build_matrix,
    filter_features,
    split_matrix,
)
from .forecasting import (
    HorizonSpec,
    serialize_daily_totals,
    serialize_forecast,
    train_direct,
)
from .linreg import fit_ols
from .registry import ModelBundle, ModelRegistry
from .service import AppState, load_dataset, make_server, parse_horizon
from .synth import (
    GeneratorConfig,
    Saturation,
    default_zones,
    generate_visits,
    generate_weather,
)
from .timeseries import serialize_visits, serialize_weather, write_holidays


def _cmd_generate(args: argparse.Namespace, config: AppConfig) -> int:
    g = config.generator
    days = args.days if args.days is not None else g.days
    seed = args.seed if args.seed is not None else g.seed
    weather_all = generate_weather(days + g.forecast_margin_days, seed=seed)
    saturation = (
        Saturation(knee_c=g.saturation_knee_c) if g.saturation_knee_c is not None else None
    )
    cfg = GeneratorConfig(
        zones=default_zones(),
        days=days,
        seed=seed,
        noise_sigma=g.noise_sigma,
        hourly_noise_scale=g.hourly_noise_scale,
        nonlinearity=saturation,
        momentum_rho=g.momentum_rho,
        momentum_sigma=g.momentum_sigma,
    )
    synthetic = generate_visits(cfg, weather_all)
    ds = synthetic.dataset

    out = config.data_path
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "visits.csv", "w") as f:
        serialize_visits(ds.zones, f)
    with open(out / "weather.csv", "w") as f:
        serialize_weather(ds.weather, f)
    forecast_part = weather_all.slice(
        ds.weather.end + ds.resolution, weather_all.end
    )
    with open(out / "weather_forecast.csv", "w") as f:
        serialize_weather(forecast_part, f)
    with open(out / "holidays.txt", "w") as f:
        write_holidays(ds.holidays, f)
    with open(out / "latents.csv", "w") as f:
        f.write("date,zone_id,latent\n")
        for zone_id in sorted(synthetic.latent_daily):
            for d, latent in synthetic.latent_daily[zone_id]:
                f.write(f"{d.isoformat()},{zone_id},{latent!r}\n")
    print(f"generated {days} days for {len(ds.zones)} zones under {out}")
    return 0


def _train_matrix(config: AppConfig, ds, zone_id: str) -> FeatureMatrix:
    return build_matrix(ds, zone_id, LagSpec(config.lag_tuple))


def _train_one(config: AppConfig, ds, zone_id: str, kind: str, direct_steps: int | None):
    if kind == "mlr_daily":
        frame = build_daily_regression(ds, zone_id)
        filtered, report = filter_features(frame, config.min_variance, 0.0)
        model = fit_ols(filtered)
        matrix = filtered
    else:
        matrix = _train_matrix(config, ds, zone_id)
        filtered, report = filter_features(matrix, config.min_variance, config.min_abs_corr)
        if kind == "mlr":
            model = fit_ols(filtered)
        elif kind == "gbrt":
            if direct_steps:
                trainer = make_gbrt_trainer(config.gbrt)
                model = ModelBundle(train_direct(filtered, HorizonSpec(direct_steps), trainer))
            else:
                model = fit_gbrt(filtered, config.gbrt)
        else:
            raise ValidationError(f"unknown model kind {kind!r}")
        matrix = filtered
    if kind != "gbrt" or not direct_steps:
        preds = predict_matrix(model, matrix)
        metrics = compute_metrics(matrix.target, preds, config.mape_epsilon)
        train_metrics = {"mae": metrics.mae, "rmse": metrics.rmse, "mape": metrics.mape}
    else:
        train_metrics = {}
    meta = {
        "kind": kind if not direct_steps else f"{kind}_direct",
        "columns": matrix.column_names,
        "resolution": config.resolution if kind != "mlr_daily" else "1d",
        "train_range": [
            matrix.row_timestamps[0].isoformat(),
            matrix.row_timestamps[-1].isoformat(),
        ],
        "rows": matrix.n_rows,
        "train_metrics": train_metrics,
        "params": {
            "max_depth": config.gbrt.max_depth,
            "n_estimators": config.gbrt.n_estimators,
            "learning_rate": config.gbrt.learning_rate,
        }
        if kind == "gbrt"
        else {},
    }
    return model, meta, {"selection.tsv": report.to_text()}


def _cmd_train(args: argparse.Namespace, config: AppConfig) -> int:
    if args.model == "mlr_daily" and config.resolution != "1d":
        config = replace(config, resolution="1d")
    ds = load_dataset(config)
    zones = ds.zone_ids if args.zone in (None, "all") else [args.zone]
    registry = ModelRegistry(config.registry_path)
    for zone_id in zones:
        model, meta, extras = _train_one(config, ds, zone_id, args.model, args.direct_steps)
        version = registry.publish(zone_id, model, meta, extras=extras)
        print(f"trained {meta['kind']} for {zone_id} -> {version}")
    return 0


def _split_boundary(config: AppConfig, matrix: FeatureMatrix, split: str):
    try:
        fraction = float(split)
    except ValueError:
        from .timeseries import parse_timestamp

        return parse_timestamp(split)
    if not 0.0 < fraction < 1.0:
        raise ValidationError("split fraction must be in (0, 1)")
    i = int(round(fraction * matrix.n_rows))
    i = min(max(i, 1), matrix.n_rows - 1)
    return matrix.row_timestamps[i]


def _cmd_evaluate(args: argparse.Namespace, config: AppConfig) -> int:
    ds = load_dataset(config)
    zones = ds.zone_ids if args.zone in (None, "all") else [args.zone]
    lag = LagSpec(config.lag_tuple)
    probe = build_matrix(ds, zones[0], lag)
    boundary = _split_boundary(config, probe, args.split)
    report = compare_models(
        ds,
        zones,
        (make_mlr_trainer(config.min_variance), make_gbrt_trainer(config.gbrt)),
        boundary,
        lag,
        config.mape_epsilon,
    )
    out = config.output_path
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.tsv").write_text(report.to_text())
    summary = {
        "schema": "comparison.v1",
        "split": boundary.isoformat(),
        "average_improvement_pct": report.average_improvement_pct,
        "zones": [
            {
                "zone_id": z.zone_id,
                "mlr_mae": z.mlr_mae,
                "gbrt_mae": z.gbrt_mae,
                "improvement_pct": z.improvement_pct,
                "mlr_r_squared": z.mlr_r_squared,
                "error": z.error,
            }
            for z in report.zones
        ],
    }
    (out / "comparison.json").write_text(json.dumps(summary, indent=2))
    print(
        f"average improvement {report.average_improvement_pct:.1f}% over "
        f"{len(report.zones)} zones -> {out / 'comparison.tsv'}"
    )
    return 0


def _cmd_forecast(args: argparse.Namespace, config: AppConfig) -> int:
    state = AppState(config)
    zones = state.dataset.zone_ids if args.zone in (None, "all") else [args.zone]
    out = config.output_path / "forecasts"
    out.mkdir(parents=True, exist_ok=True)
    from .service import _run_forecast

    for zone_id in zones:
        result, _ = _run_forecast(
            state, zone_id, args.horizon, args.strategy, state.forecast_weather
        )
        with open(out / f"{zone_id}.csv", "w") as f:
            serialize_forecast(result, f)
        with open(out / f"{zone_id}_daily.csv", "w") as f:
            serialize_daily_totals(result, f)
    print(f"forecasts for {len(zones)} zones -> {out}")
    return 0


def _cmd_risk(args: argparse.Namespace, config: AppConfig) -> int:
    state = AppState(config)
    zones = state.dataset.zone_ids if args.zone in (None, "all") else [args.zone]
    out = config.output_path
    out.mkdir(parents=True, exist_ok=True)
    from .service import _run_forecast

    with open(out / "risk.csv", "w") as f:
        f.write("timestamp,zone_id,category,crowding_band,percentile,aggravation\n")
        for zone_id in zones:
            result, assessments = _run_forecast(
                state, zone_id, args.horizon, "recursive", state.forecast_weather
            )
            for a in assessments:
                f.write(
                    f"{a.timestamp.isoformat(timespec='minutes')},{zone_id},{a.category},"
                    f"{a.crowding.band},{a.crowding.percentile!r},{a.aggravation!r}\n"
                )
    print(f"risk assessments for {len(zones)} zones -> {out / 'risk.csv'}")
    return 0


def _cmd_serve(args: argparse.Namespace, config: AppConfig) -> int:
    if args.static is not None:
        config = replace(config, server=replace(config.server, static_dir=args.static))
    state = AppState(config)
    server = make_server(state, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_plot(args: argparse.Namespace, config: AppConfig) -> int:
    """Emit figure-data files (CSV) for the standard analysis plots."""
    ds = load_dataset(config)
    zones = ds.zone_ids
    lag = LagSpec(config.lag_tuple)
    zone_id = args.zone if args.zone not in (None, "all") else zones[0]
    out = config.output_path / "figures"
    out.mkdir(parents=True, exist_ok=True)
    what = set(args.what)
    if "all" in what:
        what = {"comparison", "tuning", "one_step", "profile", "forecast"}

    probe = build_matrix(ds, zone_id, lag)
    boundary = _split_boundary(config, probe, args.split)

    if "comparison" in what:
        report = compare_models(
            ds, zones,
            (make_mlr_trainer(config.min_variance), make_gbrt_trainer(config.gbrt)),
            boundary, lag, config.mape_epsilon,
        )
        with open(out / "comparison.csv", "w") as f:
            f.write("zone_id,mlr_mae,gbrt_mae,improvement_pct,mlr_r_squared\n")
            for z in report.zones:
                if z.error is None:
                    f.write(
                        f"{z.zone_id},{z.mlr_mae!r},{z.gbrt_mae!r},"
                        f"{z.improvement_pct!r},{z.mlr_r_squared!r}\n"
                    )
        with open(out / "error_samples.csv", "w") as f:
            f.write("zone_id,model,abs_error\n")
            for zid in sorted(report.error_samples):
                for name, errs in report.error_samples[zid].items():
                    for e in errs:
                        f.write(f"{zid},{name},{e!r}\n")

    if "tuning" in what:
        train, test = split_matrix(probe, boundary)
        with open(out / "tuning_depth.csv", "w") as f:
            f.write("max_depth,rmse\n")
            for depth in (1, 2, 3, 5, 7, 10, 12):
                model = fit_gbrt(train, replace(config.gbrt, max_depth=depth))
                rmse = compute_metrics(test.target, predict_matrix(model, test)).rmse
                f.write(f"{depth},{rmse!r}\n")
        with open(out / "tuning_estimators.csv", "w") as f:
            f.write("n_estimators,rmse\n")
            for n in (1, 3, 5, 7, 9, 11, 15, 20):
                model = fit_gbrt(train, replace(config.gbrt, n_estimators=n))
                rmse = compute_metrics(test.target, predict_matrix(model, test)).rmse
                f.write(f"{n},{rmse!r}\n")

    if "one_step" in what:
        train, test = split_matrix(probe, boundary)
        model = fit_gbrt(train, config.gbrt)
        preds = predict_matrix(model, test)
        with open(out / "one_step.csv", "w") as f:
            f.write("timestamp,truth,prediction\n")
            for ts, truth, pred in zip(test.row_timestamps, test.target, preds):
                f.write(f"{ts.isoformat()},{truth!r},{pred!r}\n")

    if "profile" in what or "forecast" in what:
        filtered, _ = filter_features(probe, config.min_variance, config.min_abs_corr)
        train, _ = split_matrix(filtered, boundary)
        model = fit_gbrt(train, config.gbrt)
        series = ds.zone(zone_id)
        h = parse_horizon(args.horizon, ds.resolution)
        if "profile" in what:
            forecasts = rolling_origin_forecasts(
                model, series, ds.weather, lag, h,
                start=boundary, n_origins=args.origins, holidays=ds.holidays,
            )
            profile = step_error_profile(forecasts, series)
            with open(out / "step_profile.csv", "w") as f:
                f.write("step,mae\n")
                for k, mae in enumerate(profile.mae_by_step, start=1):
                    f.write(f"{k},{mae!r}\n")
        if "forecast" in what:
            history = series.slice(series.start, boundary)
            from .forecasting import forecast_recursive

            result = forecast_recursive(model, history, ds.weather, lag, h, ds.holidays)
            with open(out / f"forecast_{zone_id}.csv", "w") as f:
                f.write("timestamp,truth,prediction\n")
                for step in result.steps:
                    truth = series.value_at(step.timestamp)
                    t = "" if truth is None else repr(truth)
                    f.write(f"{step.timestamp.isoformat()},{t},{step.prediction!r}\n")

    print(f"figure data -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdcast",
        description="Zone-level visitor forecasting and crowd-risk decision support.",
    )
    parser.add_argument("--config", help="path to the JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic dataset")
    p.add_argument("--seed", type=int)
    p.add_argument("--days", type=int)

    p = sub.add_parser("train", help="fit a model per zone and publish it")
    p.add_argument("--model", choices=("gbrt", "mlr", "mlr_daily"), default="gbrt")
    p.add_argument("--zone", default="all")
    p.add_argument(
        "--direct-steps",
        type=int,
        default=None,
        help="train a direct bundle with this many per-step models (gbrt only)",
    )

    p = sub.add_parser("evaluate", help="compare the benchmark and the boosted model")
    p.add_argument("--compare", action="store_true", help="accepted for clarity; always on")
    p.add_argument("--zone", default="all")
    p.add_argument("--split", default="0.8", help="train/test boundary: fraction or timestamp")

    p = sub.add_parser("forecast", help="write per-zone forecast files")
    p.add_argument("--zone", default="all")
    p.add_argument("--horizon", default=None, help="e.g. 10d, 36h, or a step count")
    p.add_argument("--strategy", choices=("recursive", "direct"), default="recursive")

    p = sub.add_parser("risk", help="write risk assessments over the forecast horizon")
    p.add_argument("--zone", default="all")
    p.add_argument("--horizon", default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--static", default=None, help="directory of dashboard assets to serve")

    p = sub.add_parser("plot", help="emit figure-data files")
    p.add_argument(
        "--what",
        nargs="+",
        default=["all"],
        choices=("all", "comparison", "tuning", "one_step", "profile", "forecast"),
    )
    p.add_argument("--zone", default=None)
    p.add_argument("--split", default="0.8")
    p.add_argument("--horizon", default="10d")
    p.add_argument("--origins", type=int, default=20)
    return parser


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "forecast": _cmd_forecast,
    "risk": _cmd_risk,
    "serve": _cmd_serve,
    "plot": _cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except CrowdcastError as exc:
        print(
            json.dumps({"error": str(exc), "type": type(exc).__name__, "command": args.command}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
