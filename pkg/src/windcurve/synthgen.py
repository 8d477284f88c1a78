"""Deterministic synthetic turbine/weather generator with ground-truth
power curve, forecast error, and injected regular/irregular shutdowns."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curves import CurvePool, PowerCurve, evaluate_curve
from .height import REFERENCE_HEIGHT_M, power_law_scale
from .series import (
    DEFAULT_PERIOD,
    AlignedDataset,
    HubWindSeries,
    PowerSeries,
    WeatherForecastFrame,
    align,
    minute_of_day,
    day_of_year,
)
from .shutdown import FLAG_RULE, ShutdownMask

STEPS_PER_DAY = 96


@dataclass(frozen=True)
class RegularShutdownSpec:
    """Time-controlled daily shutdown window in minutes of day; the window
    may wrap midnight.  ``active_weekdays`` limits it to given weekdays
    (0=Monday); None means every day."""

    window: tuple[int, int]
    active_weekdays: tuple[int, ...] | None = None


@dataclass(frozen=True)
class IrregularShutdownSpec:
    """Poisson shutdown arrivals with geometric step durations."""

    arrivals_per_day: float
    mean_duration_steps: float

    def __post_init__(self):
        if self.arrivals_per_day < 0 or self.mean_duration_steps < 1:
            raise ValueError("arrival rate must be >= 0 and mean duration >= 1 step")


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    duration_days: int = 120
    start: str = "2019-01-01"
    peak_rating_kw: float = 1500.0
    # true curve: convex weights over the fixture pool, or an explicit curve
    true_weights: tuple[float, ...] | None = None
    true_curve: PowerCurve | None = None
    true_hub_height_m: float = 100.0
    terrain_alpha: float = 1.0 / 7.0
    weibull_shape: float = 2.0
    weibull_scale_ms: float = 8.0
    ar1_persistence: float = 0.95
    diurnal_amplitude: float = 0.15
    forecast_sigma_ms: float = 0.0
    forecast_bias_ms: float = 0.0
    noise_sigma_kw: float = 0.0
    regular_shutdowns: RegularShutdownSpec | None = None
    irregular_shutdowns: IrregularShutdownSpec | None = None

    def __post_init__(self):
        if self.true_weights is not None:
            w = np.asarray(self.true_weights, dtype=np.float64)
            if np.any(w < 0) or abs(np.sum(w) - 1.0) > 1e-9:
                raise ValueError("true_weights must lie on the simplex")
        for name in ("forecast_sigma_ms", "noise_sigma_kw"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= self.ar1_persistence < 1:
            raise ValueError("ar1_persistence must lie in [0, 1)")

    @classmethod
    def from_json(cls, doc: dict) -> "SynthConfig":
        doc = dict(doc)
        if "regular_shutdowns" in doc and doc["regular_shutdowns"] is not None:
            reg = doc["regular_shutdowns"]
            doc["regular_shutdowns"] = RegularShutdownSpec(
                window=tuple(reg["window"]),
                active_weekdays=(
                    tuple(reg["active_weekdays"])
                    if reg.get("active_weekdays") is not None
                    else None
                ),
            )
        if "irregular_shutdowns" in doc and doc["irregular_shutdowns"] is not None:
            irr = doc["irregular_shutdowns"]
            doc["irregular_shutdowns"] = IrregularShutdownSpec(
                arrivals_per_day=irr["arrivals_per_day"],
                mean_duration_steps=irr["mean_duration_steps"],
            )
        if "true_weights" in doc and doc["true_weights"] is not None:
            doc["true_weights"] = tuple(doc["true_weights"])
        return cls(**doc)


@dataclass(frozen=True)
class SynthDataset:
    power: PowerSeries
    hub_wind: HubWindSeries
    weather: WeatherForecastFrame
    truth_flags: np.ndarray
    true_curve: PowerCurve
    config: SynthConfig = field(repr=False, default=None)

    def aligned(self) -> AlignedDataset:
        return align(self.power, self.hub_wind, self.weather)

    def truth_mask(self) -> ShutdownMask:
        flags = np.where(self.truth_flags, FLAG_RULE, 0).astype(np.int8)
        return ShutdownMask(self.power.timestamps, flags, source="truth")


def true_curve_from_weights(
    pool: CurvePool, weights, peak_rating: float
) -> PowerCurve:
    """Convex combination of pool curves re-scaled to the peak rating."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(pool),):
        raise ValueError("weights must match the pool size")
    grid = pool.curves[0].grid
    values = np.zeros_like(grid)
    for wi, curve in zip(w, pool.curves):
        values += wi * curve.values
    return PowerCurve(id="truth", wind_speeds=grid, power_kw=values * peak_rating)


def _shutdown_steps(cfg: SynthConfig, ts: np.ndarray, rng: np.random.Generator):
    n = ts.size
    flags = np.zeros(n, dtype=bool)
    if cfg.regular_shutdowns is not None:
        spec = cfg.regular_shutdowns
        start, end = spec.window
        minutes = minute_of_day(ts)
        if start < end:
            inside = (minutes >= start) & (minutes < end)
        elif start > end:
            inside = (minutes >= start) | (minutes < end)
        else:
            inside = np.zeros(n, dtype=bool)
        if spec.active_weekdays is not None:
            # 1970-01-01 was a Thursday (weekday 3)
            weekday = (ts.astype("datetime64[D]").astype(np.int64) + 3) % 7
            inside &= np.isin(weekday, spec.active_weekdays)
        flags |= inside
    if cfg.irregular_shutdowns is not None and cfg.irregular_shutdowns.arrivals_per_day > 0:
        spec = cfg.irregular_shutdowns
        p_start = spec.arrivals_per_day / STEPS_PER_DAY
        starts = rng.random(n) < p_start
        durations = rng.geometric(1.0 / spec.mean_duration_steps, size=n)
        for idx in np.flatnonzero(starts):
            flags[idx : idx + int(durations[idx])] = True
    return flags


def generate(cfg: SynthConfig, pool: CurvePool | None = None) -> SynthDataset:
    """Generate a fully reproducible synthetic dataset.

    Hub wind comes from AR(1)-filtered Weibull draws with diurnal
    modulation; the 100 m forecast inverts the power law at the true hub
    height plus additive Gaussian error; power follows the true curve plus
    noise; injected shutdowns force power to zero and set the truth flags.
    """
    if cfg.true_curve is not None:
        true_curve = cfg.true_curve
    elif cfg.true_weights is not None:
        if pool is None:
            raise ValueError("true_weights need the fixture curve pool")
        true_curve = true_curve_from_weights(pool, cfg.true_weights, cfg.peak_rating_kw)
    else:
        raise ValueError("config must set either true_curve or true_weights")

    rng = np.random.default_rng(cfg.seed)
    n = cfg.duration_days * STEPS_PER_DAY
    step = DEFAULT_PERIOD.astype("m8[s]")
    ts = np.datetime64(cfg.start, "s") + np.arange(n) * step

    # hub wind: AR(1)-smoothed Weibull draws, diurnally modulated
    draws = rng.weibull(cfg.weibull_shape, size=n) * cfg.weibull_scale_ms
    wind = np.empty(n)
    wind[0] = draws[0]
    rho = cfg.ar1_persistence
    for k in range(1, n):
        wind[k] = rho * wind[k - 1] + (1.0 - rho) * draws[k]
    minutes = minute_of_day(ts)
    wind *= 1.0 + cfg.diurnal_amplitude * np.sin(2.0 * np.pi * (minutes - 360) / 1440.0)
    wind = np.maximum(wind, 0.0)

    # forecast at 100 m: power-law inverse of the true hub height plus error
    v100_true = power_law_scale(
        wind, cfg.true_hub_height_m, REFERENCE_HEIGHT_M, cfg.terrain_alpha
    )
    v100 = v100_true + cfg.forecast_bias_ms
    if cfg.forecast_sigma_ms > 0:
        v100 = v100 + rng.normal(0.0, cfg.forecast_sigma_ms, size=n)
    v100 = np.maximum(v100, 0.0)

    power = np.asarray(evaluate_curve(true_curve, wind), dtype=np.float64)
    if cfg.noise_sigma_kw > 0:
        power = power + rng.normal(0.0, cfg.noise_sigma_kw, size=n)
    power = np.clip(power, 0.0, cfg.peak_rating_kw)

    truth_flags = _shutdown_steps(cfg, ts, rng)
    power[truth_flags] = 0.0

    # smooth seasonal covariates (synthetic-only; feed the MLP/ARX schema)
    day = day_of_year(ts)
    direction = np.mod(
        180.0
        + 120.0 * np.sin(2.0 * np.pi * day / 365.0)
        + rng.normal(0.0, 15.0, size=n),
        360.0,
    )
    temperature = (
        10.0
        + 8.0 * np.sin(2.0 * np.pi * (day - 100) / 365.0)
        + rng.normal(0.0, 1.0, size=n)
    )
    pressure = (
        1013.0
        + 5.0 * np.sin(2.0 * np.pi * day / 365.0)
        + rng.normal(0.0, 2.0, size=n)
    )

    return SynthDataset(
        power=PowerSeries(ts, power, cfg.peak_rating_kw),
        hub_wind=HubWindSeries(ts, wind),
        weather=WeatherForecastFrame(
            timestamps=ts,
            v100=v100,
            direction=direction,
            temperature=temperature,
            pressure=pressure,
        ),
        truth_flags=truth_flags,
        true_curve=true_curve,
        config=cfg,
    )


def load_config(path) -> SynthConfig:
    with open(path, encoding="utf-8") as fh:
        return SynthConfig.from_json(json.load(fh))
