"""Prior-knowledge clipping of raw forecasts.

Three rules: power is non-negative, bounded by the peak rating, and zero at
or above the cut-out wind speed.  Values exactly at the peak rating pass
through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClipConfig:
    p_max: float
    v_cut_out: float = 25.0

    def __post_init__(self):
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if not self.v_cut_out > 0:
            raise ValueError("v_cut_out must be positive")


def clip_forecast(y_hat, v_eff_hat, cfg: ClipConfig) -> np.ndarray:
    """Apply the three clipping rules elementwise."""
    y = np.asarray(y_hat, dtype=np.float64)
    v = np.asarray(v_eff_hat, dtype=np.float64)
    if y.shape != v.shape:
        raise ValueError("forecast and wind series must be aligned")
    below_cut_out = v < cfg.v_cut_out
    out = np.zeros_like(y)
    passthrough = below_cut_out & (y > 0.0) & (y <= cfg.p_max)
    out[passthrough] = y[passthrough]
    out[below_cut_out & (y > cfg.p_max)] = cfg.p_max
    return out
