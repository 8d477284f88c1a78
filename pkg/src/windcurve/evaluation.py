"""Metrics, evaluation scenarios, and the rolling day-ahead backtest."""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass

import numpy as np

from . import autowp as autowp_mod
from .baselines import (
    ArxConfig,
    MlpConfig,
    OemCurveForecaster,
    fit_arx,
    fit_mlp,
    predict_arx,
    predict_mlp,
    weather_features,
)
from .curves import CurvePool, PowerCurve
from .exceptions import UndefinedMetricError
from .height import ALPHA_ONSHORE, correct_forecast, fit_height_model
from .postprocess import ClipConfig, clip_forecast
from .series import ROLE_HOLDOUT, ROLE_TRAIN, AlignedDataset, minute_of_day
from .shutdown import (
    FLAG_NORMAL,
    ShutdownMask,
    Strategy,
    apply_operation_strategy,
    apply_training_strategy,
)

logger = logging.getLogger(__name__)


class Scenario(str, enum.Enum):
    CONSIDER = "consider_shutdowns"
    DISREGARD = "disregard_shutdowns"


@dataclass(frozen=True)
class BacktestConfig:
    horizon: int = 96
    past_horizon: int = 96
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1 or self.past_horizon < 1:
            raise ValueError("horizon and past_horizon must be at least 1")


def nmae(y_hat, y) -> float:
    """Sum of absolute errors normalized by the summed realized generation."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape:
        raise ValueError("forecast and measurement must be aligned")
    denom = float(np.sum(y))
    if denom <= 0:
        raise UndefinedMetricError("sum of realized generation is not positive")
    return float(np.sum(np.abs(y_hat - y)) / denom)


def nrmse(y_hat, y) -> float:
    """Root mean squared error normalized by the mean realized generation."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape:
        raise ValueError("forecast and measurement must be aligned")
    mean = float(np.mean(y))
    if mean <= 0:
        raise UndefinedMetricError("mean realized generation is not positive")
    return float(np.sqrt(np.mean((y_hat - y) ** 2)) / mean)


def evaluate_scenario(
    y_hat: np.ndarray,
    y: np.ndarray,
    flags: np.ndarray | None,
    scenario: Scenario,
) -> tuple[float, float]:
    """Metrics over all rows (consider) or with flagged rows excluded
    (disregard).  Ground truth is always the raw, non-imputed measurement."""
    scenario = Scenario(scenario)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = np.isfinite(y_hat) & np.isfinite(y)
    if scenario is Scenario.DISREGARD:
        if flags is None:
            raise ValueError("disregard scenario requires a shutdown mask")
        keep &= np.asarray(flags) == FLAG_NORMAL
    if not np.any(keep):
        raise UndefinedMetricError("no rows remain for evaluation")
    return nmae(y_hat[keep], y[keep]), nrmse(y_hat[keep], y[keep])


# ---------------------------------------------------------------------------
# Rolling day-ahead backtest
# ---------------------------------------------------------------------------

KNOWN_MODELS = ("autowp", "oem", "mlp", "arx")

STOCHASTIC_MODELS = ("mlp",)


def daily_origins(ds: AlignedDataset, cfg: BacktestConfig) -> list[int]:
    """Indices of usable forecast origins: test-period midnights with a full
    contiguous past window and forecast day around them."""
    minutes = minute_of_day(ds.timestamps)
    step = ds.period.astype("m8[s]")
    origins = []
    for idx in np.flatnonzero((minutes == 0) & ds.test_mask):
        lo, hi = idx - cfg.past_horizon, idx + cfg.horizon
        if lo < 0 or hi > len(ds):
            continue
        expected = ds.timestamps[idx] + (np.arange(lo, hi) - idx) * step
        if not np.array_equal(ds.timestamps[lo:hi], expected):
            continue
        if not np.all(ds.test_mask[idx:hi]):
            continue
        origins.append(int(idx))
    return origins


def _future_cov(ds: AlignedDataset, start: int, stop: int) -> dict:
    return {
        "timestamps": ds.timestamps[start:stop],
        "v100": ds.v100[start:stop],
        "direction": ds.direction[start:stop],
        "temperature": ds.temperature[start:stop],
        "pressure": ds.pressure[start:stop],
    }


class _BacktestRun:
    """One fitted (model, strategy) cell producing per-origin forecasts."""

    def __init__(
        self,
        model_name: str,
        strategy: Strategy,
        ds: AlignedDataset,
        mask: ShutdownMask,
        pool: CurvePool | None,
        oem_curve: PowerCurve | None,
        cfg: BacktestConfig,
        seed: int,
        alpha: float,
        mlp_config: MlpConfig,
        arx_config: ArxConfig,
    ):
        self.name = model_name
        self.strategy = strategy
        self.ds = ds
        self.mask = mask
        self.oem_curve = oem_curve
        self.cfg = cfg

        train_mask = (ds.roles == ROLE_TRAIN) | (ds.roles == ROLE_HOLDOUT)
        self.height_model = fit_height_model(
            ds.hub_wind[train_mask], ds.v100[train_mask], alpha=alpha
        )
        processed = apply_training_strategy(
            ds, mask, strategy, oem_curve=oem_curve
        )
        train_rows = processed.take(processed.roles == ROLE_TRAIN)
        holdout_rows = processed.take(processed.roles == ROLE_HOLDOUT)

        if model_name == "autowp":
            if pool is None:
                raise ValueError("autowp needs a curve pool")
            fit_rows = processed.take(
                (processed.roles == ROLE_TRAIN) | (processed.roles == ROLE_HOLDOUT)
            )
            v_input = correct_forecast(fit_rows.v100, self.height_model)
            self.model, self.report = autowp_mod.fit(
                pool, v_input, fit_rows.power, ds.peak_rating, self.height_model
            )
        elif model_name == "oem":
            if oem_curve is None:
                raise ValueError("oem model needs the OEM curve")
            self.model = OemCurveForecaster(oem_curve, self.height_model)
        elif model_name == "mlp":
            holdout = holdout_rows if len(holdout_rows) else train_rows
            self.model = fit_mlp(
                weather_features(
                    train_rows.v100, train_rows.direction,
                    train_rows.temperature, train_rows.pressure,
                ),
                train_rows.power,
                weather_features(
                    holdout.v100, holdout.direction,
                    holdout.temperature, holdout.pressure,
                ),
                holdout.power,
                config=mlp_config,
                seed=seed,
            )
        elif model_name == "arx":
            arx_cfg = arx_config
            if strategy is Strategy.EXPLANATORY_VARIABLES:
                arx_cfg = ArxConfig(
                    lags=arx_config.lags,
                    ridge=arx_config.ridge,
                    use_explanatory=True,
                    night_window=arx_config.night_window,
                )
            self.arx_config = arx_cfg
            self.model = fit_arx(processed, arx_cfg)
        else:
            raise ValueError(
                f"unknown model {model_name!r}; expected one of {KNOWN_MODELS}"
            )

    def forecast_origin(self, origin: int) -> np.ndarray | None:
        ds, cfg = self.ds, self.cfg
        stop = origin + cfg.horizon
        cov = _future_cov(ds, origin, stop)
        if self.name == "autowp":
            raw = autowp_mod.predict(self.model, cov["v100"])
        elif self.name == "oem":
            raw = self.model.forecast(cov["v100"])
        elif self.name == "mlp":
            raw = predict_mlp(
                self.model,
                weather_features(
                    cov["v100"], cov["direction"], cov["temperature"], cov["pressure"]
                ),
            )
        else:  # arx
            lo = origin - cfg.past_horizon
            past_power = ds.power[lo:origin]
            past_hub = ds.hub_wind[lo:origin]
            past_flags = self.mask.flags[lo:origin]
            if not np.all(np.isfinite(past_power)):
                return None
            past_power = apply_operation_strategy(
                past_power, past_hub, past_flags, self.strategy,
                oem_curve=self.oem_curve, expected_len=cfg.past_horizon,
            )
            kwargs = {}
            if self.arx_config.use_explanatory:
                from .curves import evaluate_curve

                kwargs["past_x_sd"] = (past_flags != FLAG_NORMAL).astype(np.float64)
                kwargs["past_y_wpc"] = np.asarray(
                    evaluate_curve(self.oem_curve, past_hub), dtype=np.float64
                )
            raw = predict_arx(self.model, past_power, cov, **kwargs)

        v_eff = correct_forecast(cov["v100"], self.height_model)
        return clip_forecast(raw, v_eff, ClipConfig(p_max=ds.peak_rating))


def run_backtest(
    ds: AlignedDataset,
    mask: ShutdownMask,
    model_names: list[str],
    strategies: list[Strategy],
    scenarios: list[Scenario],
    cfg: BacktestConfig = BacktestConfig(),
    pool: CurvePool | None = None,
    oem_curve: PowerCurve | None = None,
    turbine_id: str = "turbine",
    alpha: float = ALPHA_ONSHORE,
    mlp_config: MlpConfig = MlpConfig(),
    arx_config: ArxConfig = ArxConfig(),
    jobs: int = 1,
) -> dict:
    """Rolling day-ahead backtest over every (model, strategy) pair.

    Fits on the train/holdout rows, forecasts every usable test-day origin,
    clips, and pools the concatenated forecasts into nMAE/nRMSE per
    scenario.  Stochastic models are repeated ``cfg.restarts`` times and
    reported as mean and sample standard deviation; deterministic models run
    once with standard deviation 0.
    """
    origins = daily_origins(ds, cfg)
    if not origins:
        raise ValueError("no usable forecast origins in the test period")
    scenarios = [Scenario(s) for s in scenarios]
    test_rows = ds.test_mask
    y_true = ds.power[test_rows]
    test_flags = mask.flags[test_rows]
    test_index = np.cumsum(test_rows) - 1  # dataset index -> test-row index

    def run_cell(model_name: str, strategy: Strategy):
        n_runs = cfg.restarts if model_name in STOCHASTIC_MODELS else 1
        started = time.perf_counter()
        per_run: dict[Scenario, list[tuple[float, float]]] = {s: [] for s in scenarios}
        n_samples = 0
        y_hat = None
        for run_idx in range(n_runs):
            run = _BacktestRun(
                model_name, strategy, ds, mask, pool, oem_curve, cfg,
                seed=cfg.seed + run_idx, alpha=alpha,
                mlp_config=mlp_config, arx_config=arx_config,
            )
            y_hat = np.full(y_true.shape, np.nan)
            for origin in origins:
                fc = run.forecast_origin(origin)
                if fc is None:
                    logger.warning(
                        "skipping origin %s: incomplete past window",
                        ds.timestamps[origin],
                    )
                    continue
                t0 = test_index[origin]
                y_hat[t0 : t0 + cfg.horizon] = fc
            for scenario in scenarios:
                per_run[scenario].append(
                    evaluate_scenario(y_hat, y_true, test_flags, scenario)
                )
            n_samples = int(np.sum(np.isfinite(y_hat) & np.isfinite(y_true)))
        runtime = time.perf_counter() - started
        cell_entries = []
        for scenario in scenarios:
            vals = np.array(per_run[scenario])
            cell_entries.append(
                {
                    "turbine_id": turbine_id,
                    "model": model_name,
                    "strategy": strategy.value,
                    "scenario": scenario.value,
                    "nmae_mean": float(np.mean(vals[:, 0])),
                    "nmae_std": float(np.std(vals[:, 0], ddof=1)) if n_runs > 1 else 0.0,
                    "nrmse_mean": float(np.mean(vals[:, 1])),
                    "nrmse_std": float(np.std(vals[:, 1], ddof=1)) if n_runs > 1 else 0.0,
                    "n_samples": n_samples,
                    "runtime_s": runtime,
                }
            )
        return cell_entries, y_hat

    cells = [(m, Strategy(s)) for m in model_names for s in strategies]
    entries = []
    forecasts: dict[tuple[str, str], np.ndarray] = {}
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool_exec:
            results = list(pool_exec.map(lambda c: run_cell(*c), cells))
    else:
        results = [run_cell(*c) for c in cells]
    for (model_name, strategy), (cell_entries, y_hat) in zip(cells, results):
        entries.extend(cell_entries)
        forecasts[(model_name, strategy.value)] = y_hat
    return {
        "schema": "windcurve-report-v1",
        "turbine_id": turbine_id,
        "n_origins": len(origins),
        "restarts": cfg.restarts,
        "entries": entries,
        "_forecasts": forecasts,
        "_test_timestamps": ds.timestamps[test_rows],
    }
