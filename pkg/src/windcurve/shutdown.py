"""Shutdown detection (rule-based and local-outlier-factor) and the five
handling strategies applied to training data and to the operation-time past
horizon of autoregressive models."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import knn_search
from .curves import evaluate_curve
from .exceptions import AlignmentError, ImputationError, ParameterError
from .series import (
    ROLE_HOLDOUT,
    ROLE_TRAIN,
    AlignedDataset,
    HubWindSeries,
    PowerSeries,
    cyclic_features,
    night_indicator,
)

FLAG_NORMAL = 0
FLAG_RULE = 1
FLAG_LOF = 2
FLAG_COMBINED = 3

FLAG_NAMES = {
    FLAG_NORMAL: "normal",
    FLAG_RULE: "rule_shutdown",
    FLAG_LOF: "lof_outlier",
    FLAG_COMBINED: "combined",
}


class Strategy(str, enum.Enum):
    NONE = "none"
    EXPLANATORY_VARIABLES = "explanatory_variables"
    DROP = "drop"
    IMPUTATION = "imputation"
    DROP_IMPUTATION = "drop_imputation"


@dataclass(frozen=True)
class DetectionConfig:
    """Parameters for abnormal-operation detection.

    ``p_cut_in_fraction`` sets the cut-in power threshold as a fraction of
    the peak rating (0.5% -> 7.5 kW at 1500 kWp).
    """

    v_cut_in: float = 2.5
    p_cut_in_fraction: float = 0.005
    lof_k: int = 20
    lof_threshold: float = 1.5
    night_window: tuple[int, int] = (22 * 60, 6 * 60)

    def p_cut_in(self, peak_rating: float) -> float:
        return self.p_cut_in_fraction * peak_rating


@dataclass(frozen=True)
class ShutdownMask:
    """Per-timestamp abnormal-operation labels with provenance."""

    timestamps: np.ndarray
    flags: np.ndarray
    source: str

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=np.int8)
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        if flags.shape != ts.shape:
            raise ValueError("flags must align 1:1 with timestamps")
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "timestamps", ts)

    @property
    def flagged(self) -> np.ndarray:
        return self.flags != FLAG_NORMAL

    @property
    def n_flagged(self) -> int:
        return int(np.sum(self.flagged))

    def take(self, index) -> "ShutdownMask":
        return replace(self, timestamps=self.timestamps[index], flags=self.flags[index])


def _check_aligned(ts_a: np.ndarray, ts_b: np.ndarray) -> None:
    if ts_a.shape != ts_b.shape or not np.array_equal(ts_a, ts_b):
        raise AlignmentError("series timestamps are not aligned")


def rule_based_flags(
    hub: HubWindSeries,
    power: PowerSeries,
    v_cut_in: float = 2.5,
    p_cut_in: float | None = None,
) -> ShutdownMask:
    """Flag rows where wind exceeds the cut-in speed but power stays below
    the cut-in power."""
    _check_aligned(hub.timestamps, power.timestamps)
    if p_cut_in is None:
        p_cut_in = DetectionConfig().p_cut_in(power.peak_rating)
    v, y = hub.values, power.values
    shutdown = np.isfinite(v) & np.isfinite(y) & (v > v_cut_in) & (y < p_cut_in)
    flags = np.where(shutdown, FLAG_RULE, FLAG_NORMAL).astype(np.int8)
    return ShutdownMask(timestamps=power.timestamps, flags=flags, source="rule")


def _lof_from_knn(dist, idx, kdist_train, lrd_train=None):
    """LOF scores from a k-nearest-neighbor table.

    With ``lrd_train=None`` computes in-sample local reachability densities
    first; otherwise scores queries against the fitted training set.
    """
    reach = np.maximum(dist, kdist_train[idx])
    mean_reach = np.mean(reach, axis=1)
    with np.errstate(divide="ignore"):
        lrd = np.where(mean_reach > 0, 1.0 / mean_reach, np.inf)
    ref = lrd if lrd_train is None else lrd_train
    neighbor_lrd = np.mean(ref[idx], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = neighbor_lrd / lrd
    # duplicate-point degeneracy: inf/inf -> treat as inlier
    scores = np.where(np.isnan(scores), 1.0, scores)
    return scores, lrd


class LofDetector:
    """Local outlier factor over standardized (wind, normalized power)
    points, fitted on training rows and reusable to score new windows."""

    def __init__(self, k: int = 20):
        if k < 1:
            raise ParameterError("k must be at least 1")
        self.k = k
        self._fitted = False

    def fit(self, points: np.ndarray) -> "LofDetector":
        points = np.asarray(points, dtype=np.float64)
        n = points.shape[0]
        if self.k >= n:
            raise ParameterError(f"k={self.k} must be smaller than n={n}")
        self._mean = points.mean(axis=0)
        std = points.std(axis=0)
        self._std = np.where(std > 0, std, 1.0)
        self._train = (points - self._mean) / self._std
        idx, dist = knn_search(self._train, self._train, self.k, exclude_self=True)
        self._kdist = dist[:, self.k - 1]
        self.training_scores_, self._lrd = _lof_from_knn(dist, idx, self._kdist)
        self._fitted = True
        return self

    def score(self, points: np.ndarray) -> np.ndarray:
        """Score new points against the fitted training neighborhood."""
        if not self._fitted:
            raise ParameterError("detector must be fitted before scoring")
        points = (np.asarray(points, dtype=np.float64) - self._mean) / self._std
        idx, dist = knn_search(self._train, points, self.k, exclude_self=False)
        scores, _ = _lof_from_knn(dist, idx, self._kdist, lrd_train=self._lrd)
        return scores


def lof_scores(points, k: int = 20) -> np.ndarray:
    """In-sample LOF scores (reachability-distance formulation, Euclidean
    distance in the standardized feature plane)."""
    return LofDetector(k=k).fit(np.asarray(points, dtype=np.float64)).training_scores_


def lof_flags(
    ds: AlignedDataset,
    k: int = 20,
    threshold: float = 1.5,
) -> ShutdownMask:
    """Flag LOF outliers in the (hub wind, normalized power) plane.

    The detector is fitted on training rows only; test rows are scored
    against the training neighborhood.  Rows with a missing measurement stay
    normal.
    """
    v = ds.hub_wind
    y = ds.power / ds.peak_rating
    usable = np.isfinite(v) & np.isfinite(y)
    is_train = (ds.roles == ROLE_TRAIN) | (ds.roles == ROLE_HOLDOUT)
    if not np.any(is_train):
        is_train = np.ones(len(ds), dtype=bool)
    fit_rows = usable & is_train
    points = np.column_stack([v, y])
    detector = LofDetector(k=k).fit(points[fit_rows])

    scores = np.full(len(ds), np.nan)
    scores[fit_rows] = detector.training_scores_
    query_rows = usable & ~fit_rows
    if np.any(query_rows):
        scores[query_rows] = detector.score(points[query_rows])

    flags = np.where(
        np.isfinite(scores) & (scores > threshold), FLAG_LOF, FLAG_NORMAL
    ).astype(np.int8)
    return ShutdownMask(timestamps=ds.timestamps, flags=flags, source="lof")


def combine(rule: ShutdownMask, lof: ShutdownMask) -> ShutdownMask:
    """Union of two masks with provenance preserved per row."""
    _check_aligned(rule.timestamps, lof.timestamps)
    a, b = rule.flags, lof.flags
    flags = np.where(
        (a != FLAG_NORMAL) & (b != FLAG_NORMAL),
        FLAG_COMBINED,
        np.where(a != FLAG_NORMAL, a, b),
    ).astype(np.int8)
    return ShutdownMask(timestamps=rule.timestamps, flags=flags, source="combined")


def detect(ds: AlignedDataset, cfg: DetectionConfig = DetectionConfig()) -> ShutdownMask:
    """Rule-based and LOF detection combined on an aligned dataset."""
    hub = HubWindSeries(ds.timestamps, ds.hub_wind, period=ds.period)
    power = PowerSeries(ds.timestamps, ds.power, ds.peak_rating, period=ds.period)
    rule = rule_based_flags(hub, power, cfg.v_cut_in, cfg.p_cut_in(ds.peak_rating))
    lof = lof_flags(ds, k=cfg.lof_k, threshold=cfg.lof_threshold)
    return combine(rule, lof)


def _impute_from_curve(power, hub_wind, impute_rows, oem_curve):
    if np.any(~np.isfinite(hub_wind[impute_rows])):
        raise ImputationError("hub wind measurement missing at a flagged row")
    out = power.copy()
    out[impute_rows] = evaluate_curve(oem_curve, hub_wind[impute_rows])
    return out


def apply_training_strategy(
    ds: AlignedDataset,
    mask: ShutdownMask,
    strategy: Strategy,
    oem_curve=None,
    night_window: tuple[int, int] = (22 * 60, 6 * 60),
) -> AlignedDataset:
    """Apply a shutdown-handling strategy to the training rows of a dataset.

    Test rows are never modified.  Dropping removes flagged train/holdout
    rows; imputation replaces their power with the OEM-curve value at the
    measured hub wind; explanatory variables appends shutdown label,
    theoretical power, cyclic features, and the night indicator as columns.
    """
    strategy = Strategy(strategy)
    _check_aligned(ds.timestamps, mask.timestamps)
    if strategy is Strategy.NONE:
        return ds
    in_train = (ds.roles == ROLE_TRAIN) | (ds.roles == ROLE_HOLDOUT)
    flagged_train = mask.flagged & in_train

    if strategy is Strategy.EXPLANATORY_VARIABLES:
        if oem_curve is None:
            raise ValueError("explanatory variables need the OEM curve")
        xs365, xc365, xs1440, xc1440 = cyclic_features(ds.timestamps)
        extra = dict(ds.extra)
        extra.update(
            x_sd=mask.flagged.astype(np.float64),
            y_wpc=np.asarray(evaluate_curve(oem_curve, ds.hub_wind), dtype=np.float64),
            x_s365=xs365,
            x_c365=xc365,
            x_s1440=xs1440,
            x_c1440=xc1440,
            night=night_indicator(ds.timestamps, night_window),
        )
        return ds.with_extra(extra)

    if strategy in (Strategy.DROP, Strategy.DROP_IMPUTATION):
        return ds.take(~flagged_train)

    # Strategy.IMPUTATION
    if oem_curve is None:
        raise ValueError("imputation needs the OEM curve")
    return ds.with_power(_impute_from_curve(ds.power, ds.hub_wind, flagged_train, oem_curve))


def apply_operation_strategy(
    power_window: np.ndarray,
    hub_window: np.ndarray,
    flags_window: np.ndarray,
    strategy: Strategy,
    oem_curve=None,
    expected_len: int = 96,
) -> np.ndarray:
    """Apply a strategy to the past-horizon power window at forecast time.

    Only imputation variants change values; dropping must not shorten the
    window during operation and therefore behaves like none.
    """
    strategy = Strategy(strategy)
    power_window = np.asarray(power_window, dtype=np.float64)
    if power_window.shape[0] != expected_len:
        raise ValueError(
            f"past window must have {expected_len} rows, got {power_window.shape[0]}"
        )
    if strategy in (Strategy.IMPUTATION, Strategy.DROP_IMPUTATION):
        if oem_curve is None:
            raise ValueError("imputation needs the OEM curve")
        flagged = np.asarray(flags_window) != FLAG_NORMAL
        return _impute_from_curve(power_window, np.asarray(hub_window), flagged, oem_curve)
    return power_window.copy()
