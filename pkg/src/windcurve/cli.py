"""Command-line entry point: generate | fit | detect | forecast | backtest.

Runs are configured by a JSON file plus flag overrides and are reproducible:
identical config and seed produce byte-identical output files.  Set
``WINDCURVE_LOG`` to control the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import autowp as autowp_mod
from . import fixture_library_path
from .baselines import (
    ArxConfig,
    MlpConfig,
    arx_to_json,
    fit_arx,
    fit_mlp,
    mlp_to_json,
    weather_features,
)
from .curves import (
    DEFAULT_POOL_SIZE,
    normalize_curve,
    parse_curve_library,
    resample_curve,
    select_pool,
)
from .evaluation import BacktestConfig, Scenario, run_backtest
from .exceptions import WindcurveError
from .height import ALPHA_ONSHORE, correct_forecast, fit_height_model
from .io import (
    atomic_write,
    format_float,
    read_mask_csv,
    read_power_csv,
    read_weather_csv,
    read_wind_csv,
    write_curve_csv,
    write_json,
    write_mask_csv,
    write_power_csv,
    write_weather_csv,
    write_wind_csv,
)
from .series import ROLE_HOLDOUT, ROLE_TRAIN, align, split
from .shutdown import DetectionConfig, Strategy, apply_training_strategy, detect
from .synthgen import SynthConfig, generate

logger = logging.getLogger("windcurve")


def _load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_curves(run_cfg: dict):
    library = run_cfg.get("curve_library") or fixture_library_path()
    curves, skipped = parse_curve_library(library)
    if skipped:
        logger.warning("%d library entries skipped (incomplete curve)", skipped)
    normalized = [normalize_curve(resample_curve(c)) for c in curves]
    pool = select_pool(normalized, run_cfg.get("pool_size", DEFAULT_POOL_SIZE))
    oem_id = run_cfg.get("oem_curve_id")
    by_id = {c.id: c for c in curves}
    if oem_id is None:
        oem_curve = resample_curve(curves[0])
    elif oem_id in by_id:
        oem_curve = resample_curve(by_id[oem_id])
    else:
        raise WindcurveError(
            f"unknown oem_curve_id {oem_id!r}; available: {sorted(by_id)}"
        )
    return pool, oem_curve


def _load_dataset(run_cfg: dict):
    power = read_power_csv(run_cfg["power_csv"], run_cfg["peak_rating_kw"])
    hub = read_wind_csv(run_cfg["wind_csv"])
    weather = read_weather_csv(run_cfg["weather_csv"])
    ds = align(power, hub, weather)
    if ds.n_dropped:
        logger.info("alignment dropped %d rows with missing power/v100", ds.n_dropped)
    if "split_boundary" in run_cfg:
        ds = split(
            ds,
            np.datetime64(run_cfg["split_boundary"], "s"),
            run_cfg.get("holdout_fraction", 0.2),
        )
    return ds


def _detection_config(run_cfg: dict) -> DetectionConfig:
    det = run_cfg.get("detection", {})
    return DetectionConfig(
        v_cut_in=det.get("v_cut_in", 2.5),
        p_cut_in_fraction=det.get("p_cut_in_fraction", 0.005),
        lof_k=det.get("lof_k", 20),
        lof_threshold=det.get("lof_threshold", 1.5),
    )


def cmd_generate(args) -> int:
    cfg_doc = _load_json(args.config)
    if args.seed is not None:
        cfg_doc["seed"] = args.seed
    cfg = SynthConfig.from_json(cfg_doc)
    curves, _ = parse_curve_library(args.curve_library or fixture_library_path())
    pool = select_pool([normalize_curve(resample_curve(c)) for c in curves])
    data = generate(cfg, pool)

    out = args.out
    os.makedirs(out, exist_ok=True)
    write_power_csv(os.path.join(out, "power.csv"), data.power)
    write_wind_csv(os.path.join(out, "hub_wind.csv"), data.hub_wind)
    write_weather_csv(os.path.join(out, "weather.csv"), data.weather)
    write_mask_csv(os.path.join(out, "truth_mask.csv"), data.truth_mask())
    write_curve_csv(os.path.join(out, "truth_curve.csv"), data.true_curve)
    manifest = {
        "seed": cfg.seed,
        "duration_days": cfg.duration_days,
        "start": cfg.start,
        "peak_rating_kw": cfg.peak_rating_kw,
        "n_rows": int(data.power.timestamps.size),
        "n_shutdown_steps": int(np.sum(data.truth_flags)),
        "files": [
            "power.csv", "hub_wind.csv", "weather.csv",
            "truth_mask.csv", "truth_curve.csv",
        ],
    }
    write_json(os.path.join(out, "manifest.json"), manifest)
    print(f"generated {manifest['n_rows']} rows into {out}")
    return 0


def cmd_detect(args) -> int:
    run_cfg = _load_json(args.config)
    ds = _load_dataset(run_cfg)
    mask = detect(ds, _detection_config(run_cfg))
    out = args.out or run_cfg.get("out_dir", ".")
    os.makedirs(out, exist_ok=True)
    write_mask_csv(os.path.join(out, "mask.csv"), mask)
    share = mask.n_flagged / len(ds)
    print(f"flagged {mask.n_flagged}/{len(ds)} rows ({share:.1%})")
    return 0


def cmd_fit(args) -> int:
    run_cfg = _load_json(args.config)
    ds = _load_dataset(run_cfg)
    pool, oem_curve = _load_curves(run_cfg)
    det_cfg = _detection_config(run_cfg)
    mask = detect(ds, det_cfg)
    strategy = Strategy(args.strategies[0] if args.strategies else
                        run_cfg.get("strategies", ["none"])[0])
    processed = apply_training_strategy(ds, mask, strategy, oem_curve=oem_curve)
    train_rows = processed.take(
        (processed.roles == ROLE_TRAIN) | (processed.roles == ROLE_HOLDOUT)
    )
    alpha = run_cfg.get("alpha", ALPHA_ONSHORE)
    height_model = fit_height_model(train_rows.hub_wind, train_rows.v100, alpha=alpha)

    out = args.out or run_cfg.get("out_dir", ".")
    os.makedirs(out, exist_ok=True)
    seed = args.seed if args.seed is not None else run_cfg.get("seed", 0)
    models = args.models or run_cfg.get("models", ["autowp"])
    for name in models:
        if name == "autowp":
            v_input = correct_forecast(train_rows.v100, height_model)
            model, report = autowp_mod.fit(
                pool, v_input, train_rows.power, run_cfg["peak_rating_kw"],
                height_model, mode=run_cfg.get("autowp_mode", "simplex"),
            )
            atomic_write(os.path.join(out, "model_autowp.json"),
                         autowp_mod.serialize(model) + "\n")
            print(
                f"autowp: mse={format_float(report.mse)} "
                f"weights_sum={np.sum(model.weights):.6f}"
            )
        elif name == "oem":
            doc = {
                "schema": "windcurve-oem-v1",
                "oem_curve_id": oem_curve.id,
                "alpha_h": height_model.alpha,
                "h_eff_m": height_model.h_eff,
            }
            write_json(os.path.join(out, "model_oem.json"), doc)
            print(f"oem: h_eff={height_model.h_eff:.2f} m")
        elif name == "mlp":
            holdout = processed.take(processed.roles == ROLE_HOLDOUT)
            train_only = processed.take(processed.roles == ROLE_TRAIN)
            if not len(holdout):
                holdout = train_only
            mlp = fit_mlp(
                weather_features(train_only.v100, train_only.direction,
                                 train_only.temperature, train_only.pressure),
                train_only.power,
                weather_features(holdout.v100, holdout.direction,
                                 holdout.temperature, holdout.pressure),
                holdout.power,
                config=MlpConfig(**run_cfg.get("mlp", {})),
                seed=seed,
            )
            atomic_write(os.path.join(out, "model_mlp.json"), mlp_to_json(mlp) + "\n")
            print(f"mlp: holdout_loss={mlp.holdout_loss:.6g}")
        elif name == "arx":
            arx_kwargs = dict(run_cfg.get("arx", {}))
            if "lags" in arx_kwargs:
                arx_kwargs["lags"] = tuple(arx_kwargs["lags"])
            if strategy is Strategy.EXPLANATORY_VARIABLES:
                arx_kwargs["use_explanatory"] = True
            arx = fit_arx(processed, ArxConfig(**arx_kwargs))
            atomic_write(os.path.join(out, "model_arx.json"), arx_to_json(arx) + "\n")
            print(f"arx: {len(arx.coef)} coefficients")
        else:
            raise WindcurveError(
                f"unknown model {name!r}; valid names: autowp, oem, mlp, arx"
            )
    return 0


def cmd_forecast(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        text = fh.read()
    schema = json.loads(text).get("schema", "")
    weather = read_weather_csv(args.weather)
    origin = np.datetime64(args.origin, "s")
    idx = int(np.searchsorted(weather.timestamps, origin))
    horizon = 96
    if idx + horizon > weather.timestamps.size or weather.timestamps[idx] != origin:
        raise WindcurveError(
            f"weather file does not cover 96 steps from origin {args.origin}"
        )
    v100 = weather.v100[idx : idx + horizon]
    if schema == "windcurve-ensemble-v1":
        model = autowp_mod.deserialize(text)
        y_hat = autowp_mod.predict(model, v100)
    elif schema == "windcurve-arx-v1":
        raise WindcurveError(
            "ARX forecasting needs the past 96 power measurements; "
            "run the backtest command, which builds the past horizon"
        )
    else:
        raise WindcurveError(f"cannot forecast with model schema {schema!r}")
    ts = weather.timestamps[idx : idx + horizon]
    lines = ["timestamp,power_kw"]
    lines += [f"{np.datetime64(t, 's')},{format_float(v)}" for t, v in zip(ts, y_hat)]
    atomic_write(args.out, "\n".join(lines) + "\n")
    print(f"wrote {horizon}-step forecast to {args.out}")
    return 0


def cmd_backtest(args) -> int:
    run_cfg = _load_json(args.config)
    ds = _load_dataset(run_cfg)
    pool, oem_curve = _load_curves(run_cfg)
    mask_path = run_cfg.get("mask_csv")
    if mask_path:
        mask = read_mask_csv(mask_path)
    else:
        mask = detect(ds, _detection_config(run_cfg))
    bt = run_cfg.get("backtest", {})
    cfg = BacktestConfig(
        horizon=bt.get("horizon", 96),
        past_horizon=bt.get("past_horizon", 96),
        restarts=bt.get("restarts", 5),
        seed=args.seed if args.seed is not None else bt.get("seed", 0),
    )
    models = args.models or run_cfg.get("models", ["autowp", "oem"])
    strategies = args.strategies or run_cfg.get("strategies", ["none"])
    scenarios = args.scenarios or run_cfg.get(
        "scenarios", [s.value for s in Scenario]
    )
    arx_kwargs = dict(run_cfg.get("arx", {}))
    if "lags" in arx_kwargs:
        arx_kwargs["lags"] = tuple(arx_kwargs["lags"])
    report = run_backtest(
        ds, mask, models, strategies, scenarios, cfg,
        pool=pool, oem_curve=oem_curve,
        turbine_id=run_cfg.get("turbine_id", "turbine"),
        alpha=run_cfg.get("alpha", ALPHA_ONSHORE),
        mlp_config=MlpConfig(**run_cfg.get("mlp", {})),
        arx_config=ArxConfig(**arx_kwargs),
        jobs=args.jobs,
    )

    out = args.out or run_cfg.get("out_dir", ".")
    os.makedirs(out, exist_ok=True)
    forecasts = report.pop("_forecasts")
    test_ts = report.pop("_test_timestamps")
    report["seed"] = cfg.seed
    # wall-clock runtimes go to a sidecar so report.json is byte-reproducible
    timings = []
    for entry in report["entries"]:
        timings.append(
            {
                "model": entry["model"],
                "strategy": entry["strategy"],
                "scenario": entry["scenario"],
                "runtime_s": entry.pop("runtime_s"),
            }
        )
        for key, value in entry.items():
            if isinstance(value, float):
                entry[key] = float(format_float(value))
    write_json(os.path.join(out, "report.json"), report)
    write_json(os.path.join(out, "timings.json"), {"entries": timings})

    cols = sorted(forecasts)
    lines = ["timestamp," + ",".join(f"{m}__{s}" for m, s in cols)]
    for i, ts in enumerate(test_ts):
        cells = [str(np.datetime64(ts, "s"))]
        cells += [format_float(forecasts[c][i]) for c in cols]
        lines.append(",".join(cells))
    atomic_write(os.path.join(out, "forecasts.csv"), "\n".join(lines) + "\n")

    for entry in report["entries"]:
        print(
            f"{entry['model']:8s} {entry['strategy']:22s} {entry['scenario']:20s} "
            f"nMAE={entry['nmae_mean']:.4f}±{entry['nmae_std']:.4f} "
            f"nRMSE={entry['nrmse_mean']:.4f}±{entry['nrmse_std']:.4f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windcurve",
        description="Day-ahead wind-power forecasting with WP-curve ensembles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a synthetic CSV bundle")
    p_gen.add_argument("--config", required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--curve-library")
    p_gen.set_defaults(func=cmd_generate)

    p_det = sub.add_parser("detect", help="detect abnormal operation")
    p_det.add_argument("--config", required=True)
    p_det.add_argument("--out")
    p_det.set_defaults(func=cmd_detect)

    p_fit = sub.add_parser("fit", help="fit forecasting models")
    p_fit.add_argument("--config", required=True)
    p_fit.add_argument("--out")
    p_fit.add_argument("--seed", type=int)
    p_fit.add_argument("--models", nargs="+")
    p_fit.add_argument("--strategies", nargs="+")
    p_fit.set_defaults(func=cmd_fit)

    p_fc = sub.add_parser("forecast", help="96-step forecast from a model file")
    p_fc.add_argument("--model", required=True)
    p_fc.add_argument("--weather", required=True)
    p_fc.add_argument("--origin", required=True)
    p_fc.add_argument("--out", required=True)
    p_fc.set_defaults(func=cmd_forecast)

    p_bt = sub.add_parser("backtest", help="rolling day-ahead backtest")
    p_bt.add_argument("--config", required=True)
    p_bt.add_argument("--out")
    p_bt.add_argument("--seed", type=int)
    p_bt.add_argument("--jobs", type=int, default=1)
    p_bt.add_argument("--models", nargs="+")
    p_bt.add_argument("--strategies", nargs="+")
    p_bt.add_argument("--scenarios", nargs="+")
    p_bt.set_defaults(func=cmd_backtest)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("WINDCURVE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WindcurveError, OSError, ValueError, KeyError) as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
