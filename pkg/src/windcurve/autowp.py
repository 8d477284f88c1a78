"""Ensemble wind-power-curve model: fit a non-negative (optionally
sum-to-one) weighting of a diverse pool of normalized curves to a new
turbine, then forecast power from height-corrected wind-speed forecasts.

Modes:

* ``simplex`` -- weights are non-negative and normalized to sum to one; the
  ensemble output is a convex combination of normalized curves, re-scaled by
  the turbine's peak rating.
* ``relaxed`` -- weights are only non-negative and fitted against the target
  in kW directly, so the output is already in kW and no re-scaling happens.
  Suitable when the peak rating is unknown or the turbine runs derated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .curves import CurvePool, NormalizedPowerCurve, evaluate_curve
from .exceptions import FitError, ModelFormatError
from .height import HeightCorrectionModel, correct_forecast

MODES = ("simplex", "relaxed")


@dataclass(frozen=True)
class FitReport:
    mse: float
    weights: np.ndarray
    n_samples: int
    used_zero_fallback: bool = False


@dataclass(frozen=True)
class EnsembleModel:
    pool: CurvePool
    weights: np.ndarray
    peak_rating: float
    height_model: HeightCorrectionModel
    mode: str = "simplex"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.pool),):
            raise ValueError("weights must match the pool size")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if self.mode == "simplex":
            if np.any(w > 1) or abs(np.sum(w) - 1.0) > 1e-9:
                raise ValueError("simplex weights must lie in [0,1] and sum to 1")
        if not self.peak_rating > 0:
            raise ValueError("peak_rating must be positive")
        object.__setattr__(self, "weights", w)


def design_matrix(pool: CurvePool, v: np.ndarray) -> np.ndarray:
    """Column n holds pool curve n evaluated at every wind speed in ``v``."""
    v = np.asarray(v, dtype=np.float64)
    return np.column_stack([evaluate_curve(c, v) for c in pool.curves])


def fit(
    pool: CurvePool,
    v_input: np.ndarray,
    y_kw: np.ndarray,
    peak_rating: float,
    height_model: HeightCorrectionModel,
    mode: str = "simplex",
) -> tuple[EnsembleModel, FitReport]:
    """Fit ensemble weights by non-negative least squares.

    ``v_input`` is the wind speed used to evaluate the pool curves (by
    default the height-corrected forecast over the training period) and
    ``y_kw`` the measured power.  Rows with missing values are excluded.
    In simplex mode the target is normalized by ``peak_rating`` and the NNLS
    solution is post-normalized to sum to one; an all-zero solution falls
    back to uniform weights.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not peak_rating > 0:
        raise ValueError("peak_rating must be positive")
    v_input = np.asarray(v_input, dtype=np.float64)
    y_kw = np.asarray(y_kw, dtype=np.float64)
    if v_input.shape != y_kw.shape:
        raise ValueError("v_input and y_kw must be aligned")
    keep = np.isfinite(v_input) & np.isfinite(y_kw)
    if not np.any(keep):
        raise FitError("no usable training rows")
    v_fit = v_input[keep]
    target = y_kw[keep] / peak_rating if mode == "simplex" else y_kw[keep]

    a = design_matrix(pool, v_fit)
    weights, _ = nnls(a, target)

    used_fallback = False
    if mode == "simplex":
        total = float(np.sum(weights))
        if total <= 0.0:
            weights = np.full(len(pool), 1.0 / len(pool))
            used_fallback = True
        else:
            weights = weights / total

    residual = a @ weights - target
    report = FitReport(
        mse=float(np.mean(residual**2)),
        weights=weights.copy(),
        n_samples=int(np.sum(keep)),
        used_zero_fallback=used_fallback,
    )
    model = EnsembleModel(
        pool=pool,
        weights=weights,
        peak_rating=peak_rating,
        height_model=height_model,
        mode=mode,
    )
    return model, report


def predict_normalized(model: EnsembleModel, v) -> np.ndarray:
    """Weighted sum of the pool curves at hub-height wind speed ``v``."""
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    return design_matrix(model.pool, v) @ model.weights


def predict(model: EnsembleModel, v100_forecast: np.ndarray) -> np.ndarray:
    """Forecast power (kW) from a 100 m wind-speed forecast.

    Applies the height correction, evaluates the ensemble, and re-scales by
    the peak rating in simplex mode (relaxed weights already carry the kW
    scale).  Callers should clip the result with the post-processing rules
    before reporting.
    """
    v_eff = correct_forecast(v100_forecast, model.height_model)
    out = predict_normalized(model, v_eff)
    if model.mode == "simplex":
        out = out * model.peak_rating
    return out


def serialize(model: EnsembleModel) -> str:
    doc = {
        "schema": "windcurve-ensemble-v1",
        "pool_ids": model.pool.ids,
        "grid_step": model.pool.curves[0].grid_step,
        "pool_values": [model.pool.curves[i].values.tolist() for i in range(len(model.pool))],
        "weights": model.weights.tolist(),
        "peak_rating_kw": model.peak_rating,
        "alpha_h": model.height_model.alpha,
        "h_eff_m": model.height_model.h_eff,
        "mode": model.mode,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def deserialize(text: str) -> EnsembleModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from None
    required = (
        "pool_ids",
        "grid_step",
        "pool_values",
        "weights",
        "peak_rating_kw",
        "alpha_h",
        "h_eff_m",
        "mode",
    )
    missing = [key for key in required if key not in doc]
    if missing:
        raise ModelFormatError(f"missing fields: {', '.join(missing)}")
    if doc["mode"] not in MODES:
        raise ModelFormatError(f"unknown mode {doc['mode']!r}")
    if len(doc["pool_ids"]) != len(doc["pool_values"]):
        raise ModelFormatError("pool_ids and pool_values lengths differ")
    curves = tuple(
        NormalizedPowerCurve(id=cid, grid_step=doc["grid_step"], values=np.array(vals))
        for cid, vals in zip(doc["pool_ids"], doc["pool_values"])
    )
    return EnsembleModel(
        pool=CurvePool(curves=curves),
        weights=np.asarray(doc["weights"], dtype=np.float64),
        peak_rating=float(doc["peak_rating_kw"]),
        height_model=HeightCorrectionModel(
            alpha=float(doc["alpha_h"]), h_eff=float(doc["h_eff_m"])
        ),
        mode=doc["mode"],
    )
