"""Wind profile power law: scaling between heights, effective hub height
estimation, and hub-height correction of forecast wind series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import HeightEstimationError

ALPHA_ONSHORE = 1.0 / 7.0
ALPHA_OFFSHORE = 1.0 / 9.0

REFERENCE_HEIGHT_M = 100.0


@dataclass(frozen=True)
class HeightCorrectionModel:
    alpha: float
    h_eff: float
    reference_height: float = REFERENCE_HEIGHT_M

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.h_eff > 0:
            raise ValueError("h_eff must be positive")


def power_law_scale(v_b, h_b: float, h_a: float, alpha: float):
    """Scale wind speed from height ``h_b`` to ``h_a``: v_a = v_b·(h_a/h_b)^alpha."""
    if not (h_a > 0 and h_b > 0):
        raise ValueError("heights must be positive")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return np.asarray(v_b, dtype=np.float64) * (h_a / h_b) ** alpha


def estimate_effective_hub_height(
    mean_v_eff: float, mean_v100_forecast: float, alpha: float
) -> float:
    """Height at which the power-law-scaled 100 m forecast matches the hub
    measurement on average: h_eff = 100·(mean_v_eff/mean_v100)^(1/alpha)."""
    if not (mean_v_eff > 0 and mean_v100_forecast > 0):
        raise HeightEstimationError(
            "wind speed means must be positive to estimate the hub height"
        )
    return REFERENCE_HEIGHT_M * (mean_v_eff / mean_v100_forecast) ** (1.0 / alpha)


def fit_height_model(
    hub_wind: np.ndarray,
    v100: np.ndarray,
    alpha: float = ALPHA_ONSHORE,
    exclude: np.ndarray | None = None,
) -> HeightCorrectionModel:
    """Estimate the effective hub height from paired training rows.

    Means use rows where both measurement and forecast are present;
    ``exclude`` optionally drops flagged (shutdown) rows.
    """
    hub_wind = np.asarray(hub_wind, dtype=np.float64)
    v100 = np.asarray(v100, dtype=np.float64)
    keep = np.isfinite(hub_wind) & np.isfinite(v100)
    if exclude is not None:
        keep &= ~np.asarray(exclude, dtype=bool)
    if not np.any(keep):
        raise HeightEstimationError("no usable rows to estimate the hub height")
    h_eff = estimate_effective_hub_height(
        float(np.mean(hub_wind[keep])), float(np.mean(v100[keep])), alpha
    )
    return HeightCorrectionModel(alpha=alpha, h_eff=h_eff)


def correct_forecast(v100, model: HeightCorrectionModel):
    """Correct a 100 m wind-speed forecast to the effective hub height."""
    return power_law_scale(v100, model.reference_height, model.h_eff, model.alpha)
