import numpy as np
import pytest

from windcurve.curves import evaluate_curve
from windcurve.exceptions import ImputationError
from windcurve.series import (
    ROLE_TEST,
    ROLE_TRAIN,
    HubWindSeries,
    PowerSeries,
)
from windcurve.shutdown import (
    FLAG_COMBINED,
    FLAG_LOF,
    FLAG_NORMAL,
    FLAG_RULE,
    DetectionConfig,
    LofDetector,
    ShutdownMask,
    Strategy,
    apply_operation_strategy,
    apply_training_strategy,
    combine,
    detect,
    lof_scores,
    rule_based_flags,
)
from tests.test_series import make_aligned, quarter_hours


def reference_lof(points, k):
    """Naive O(n^2) LOF oracle (standardized coordinates, k-distance
    neighborhoods with reachability distances)."""
    pts = np.asarray(points, dtype=np.float64)
    pts = (pts - pts.mean(0)) / pts.std(0)
    n = pts.shape[0]
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")
    neighbors = order[:, :k]
    kdist = dist[np.arange(n), order[:, k - 1]]
    lrd = np.empty(n)
    for i in range(n):
        reach = np.maximum(dist[i, neighbors[i]], kdist[neighbors[i]])
        lrd[i] = 1.0 / np.mean(reach)
    scores = np.empty(n)
    for i in range(n):
        scores[i] = np.mean(lrd[neighbors[i]]) / lrd[i]
    return scores


def test_rule_flags_hand_values():
    ts = quarter_hours("2019-01-01", 4)
    hub = HubWindSeries(ts, np.array([5.0, 1.0, 5.0, 5.0]))
    power = PowerSeries(ts, np.array([0.0, 0.0, 100.0, 5.0]), peak_rating=1500.0)
    mask = rule_based_flags(hub, power, v_cut_in=2.5)
    # p_cut_in = 0.5% of 1500 = 7.5 kW
    np.testing.assert_array_equal(
        mask.flags, [FLAG_RULE, FLAG_NORMAL, FLAG_NORMAL, FLAG_RULE]
    )


def test_rule_missing_values_stay_normal():
    ts = quarter_hours("2019-01-01", 2)
    hub = HubWindSeries(ts, np.array([np.nan, 5.0]))
    power = PowerSeries(ts, np.array([0.0, np.nan]), peak_rating=1500.0)
    mask = rule_based_flags(hub, power)
    assert mask.n_flagged == 0


def test_detection_config_p_cut_in():
    assert DetectionConfig().p_cut_in(1500.0) == pytest.approx(7.5)


def test_lof_matches_reference(rng):
    points = rng.normal(size=(150, 2))
    points[:50] *= 0.3  # mixed densities
    ours = lof_scores(points, k=10)
    expect = reference_lof(points, k=10)
    np.testing.assert_allclose(ours, expect, rtol=1e-9)


def test_lof_toy_outlier():
    # 100 inliers on a grid plus one distant outlier
    gx, gy = np.meshgrid(np.arange(10.0), np.arange(10.0))
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    points = np.vstack([grid, [[50.0, 50.0]]])
    scores = lof_scores(points, k=10)
    assert scores[-1] > 1.5
    assert np.all(np.abs(scores[:-1] - 1.0) < 0.2)


def test_lof_novelty_scoring_consistent(rng):
    train = rng.normal(size=(200, 2))
    det = LofDetector(k=15).fit(train)
    inlier = det.score(np.zeros((1, 2)))
    outlier = det.score(np.array([[25.0, 25.0]]))
    assert outlier[0] > inlier[0]
    assert outlier[0] > 1.5


def test_lof_threshold_zero_flags_all():
    ds = make_aligned(300)
    mask = detect(ds, DetectionConfig(lof_threshold=0.0))
    assert mask.n_flagged == len(ds)


def test_combine_union_semantics():
    ts = quarter_hours("2019-01-01", 4)
    rule = ShutdownMask(
        ts, np.array([FLAG_RULE, FLAG_NORMAL, FLAG_RULE, FLAG_NORMAL], np.int8), "rule"
    )
    lof = ShutdownMask(
        ts, np.array([FLAG_LOF, FLAG_LOF, FLAG_NORMAL, FLAG_NORMAL], np.int8), "lof"
    )
    out = combine(rule, lof)
    np.testing.assert_array_equal(
        out.flags, [FLAG_COMBINED, FLAG_LOF, FLAG_RULE, FLAG_NORMAL]
    )
    assert set(np.flatnonzero(out.flagged)) >= set(np.flatnonzero(rule.flagged))


def flagged_mask(ds, idx):
    flags = np.zeros(len(ds), dtype=np.int8)
    flags[idx] = FLAG_RULE
    return ShutdownMask(ds.timestamps, flags, source="test")


def all_train(ds):
    return ds.with_roles(np.full(len(ds), ROLE_TRAIN, dtype=np.int8))


def test_strategy_none_identity(oem_curve):
    ds = make_aligned(100)
    mask = flagged_mask(ds, [5, 6, 7])
    out = apply_training_strategy(ds, mask, Strategy.NONE, oem_curve=oem_curve)
    np.testing.assert_array_equal(out.power, ds.power)
    assert len(out) == len(ds)


def test_strategy_drop_removes_flagged_training_rows(oem_curve):
    ds = make_aligned(100)
    roles = np.full(100, ROLE_TRAIN, dtype=np.int8)
    roles[80:] = ROLE_TEST
    ds = ds.with_roles(roles)
    idx = list(range(10, 20)) + [85]  # one flagged test row must survive
    mask = flagged_mask(ds, idx)
    out = apply_training_strategy(ds, mask, Strategy.DROP, oem_curve=oem_curve)
    assert len(out) == 90  # exactly the 10 flagged training rows removed
    assert np.datetime64(ds.timestamps[85], "s") in out.timestamps.astype(
        "datetime64[s]"
    )


def test_strategy_imputation_uses_oem_curve(oem_curve):
    ds = all_train(make_aligned(100))
    idx = [int(np.argmin(np.abs(ds.hub_wind - 8.0)))]
    mask = flagged_mask(ds, idx)
    out = apply_training_strategy(ds, mask, Strategy.IMPUTATION, oem_curve=oem_curve)
    v = ds.hub_wind[idx[0]]
    assert out.power[idx[0]] == pytest.approx(evaluate_curve(oem_curve, v))
    # unflagged rows are bit-identical
    rest = np.ones(100, dtype=bool)
    rest[idx] = False
    np.testing.assert_array_equal(out.power[rest], ds.power[rest])


def test_strategy_explanatory_appends_features(oem_curve):
    ds = make_aligned(100)
    mask = flagged_mask(ds, [3])
    out = apply_training_strategy(
        ds, mask, Strategy.EXPLANATORY_VARIABLES, oem_curve=oem_curve
    )
    for col in ("x_sd", "y_wpc", "x_s365", "x_c365", "x_s1440", "x_c1440", "night"):
        assert col in out.extra
    assert out.extra["x_sd"][3] == 1.0
    assert out.extra["x_sd"].sum() == 1.0
    np.testing.assert_array_equal(out.power, ds.power)


def test_operation_imputation_full_window(oem_curve):
    power = np.zeros(96)
    hub = np.full(96, 8.0)
    flags = np.full(96, FLAG_RULE, dtype=np.int8)
    out = apply_operation_strategy(
        power, hub, flags, Strategy.IMPUTATION, oem_curve=oem_curve
    )
    np.testing.assert_allclose(out, evaluate_curve(oem_curve, hub))


def test_operation_drop_keeps_window_length(oem_curve):
    power = np.arange(96.0)
    hub = np.full(96, 8.0)
    flags = np.zeros(96, dtype=np.int8)
    flags[:10] = FLAG_RULE
    out = apply_operation_strategy(power, hub, flags, Strategy.DROP, oem_curve)
    np.testing.assert_array_equal(out, power)
    assert out.shape == (96,)


def test_operation_wrong_length_rejected(oem_curve):
    with pytest.raises(ValueError):
        apply_operation_strategy(
            np.zeros(95), np.zeros(95), np.zeros(95, np.int8), Strategy.NONE
        )


def test_imputation_missing_hub_raises(oem_curve):
    ds = all_train(make_aligned(50))
    hub = ds.hub_wind.copy()
    hub[4] = np.nan
    ds = type(ds)(**{**ds.__dict__, "hub_wind": hub})
    mask = flagged_mask(ds, [4])
    with pytest.raises(ImputationError):
        apply_training_strategy(ds, mask, Strategy.IMPUTATION, oem_curve=oem_curve)


def test_detect_on_synthetic_truth(pool, synth):
    ds = synth.aligned()
    truth = synth.truth_flags.astype(bool)
    mask = detect(ds)
    rule_visible = truth & (ds.hub_wind > 2.5)
    # every true shutdown step with wind above cut-in is caught
    assert np.all(mask.flagged[rule_visible])
