import numpy as np
import pytest
from hypothesis import given, strategies as st

from windcurve.evaluation import (
    BacktestConfig,
    Scenario,
    daily_origins,
    evaluate_scenario,
    nmae,
    nrmse,
    run_backtest,
)
from windcurve.exceptions import UndefinedMetricError
from windcurve.series import ROLE_TEST, ROLE_TRAIN, split
from windcurve.shutdown import FLAG_NORMAL, FLAG_RULE, detect
from tests.conftest import make_synth


def test_metric_hand_values():
    y = np.array([1.0, 1.0])
    y_hat = np.array([0.5, 1.5])
    assert nmae(y_hat, y) == pytest.approx(0.5, abs=1e-12)
    assert nrmse(y_hat, y) == pytest.approx(0.5, abs=1e-12)


def test_metrics_zero_for_perfect_forecast(rng):
    y = rng.uniform(1, 100, 500)
    assert nmae(y, y) == 0.0
    assert nrmse(y, y) == 0.0


def test_metrics_undefined_for_nonpositive_truth():
    with pytest.raises(UndefinedMetricError):
        nmae(np.ones(3), np.zeros(3))
    with pytest.raises(UndefinedMetricError):
        nrmse(np.ones(3), np.full(3, -1.0))


@given(st.integers(0, 2**32 - 1))
def test_nrmse_dominates_nmae(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 50))
    y = rng.uniform(0.1, 10, n)
    y_hat = y + rng.normal(0, 2, n)
    assert nrmse(y_hat, y) >= nmae(y_hat, y) - 1e-12


def test_nrmse_dominates_nmae_bulk(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        y = rng.uniform(0.1, 5, n)
        y_hat = y + rng.normal(0, 1, n)
        assert nrmse(y_hat, y) >= nmae(y_hat, y) - 1e-12


def test_disregard_excludes_flagged(rng):
    y = rng.uniform(1, 10, 100)
    y_hat = y + rng.normal(0, 1, 100)
    flags = np.zeros(100, dtype=np.int8)
    flags[:30] = FLAG_RULE
    base = evaluate_scenario(y_hat, y, flags, Scenario.DISREGARD)
    # perturbing forecasts only at flagged rows leaves disregard bit-identical
    y_hat2 = y_hat.copy()
    y_hat2[:30] += 1000.0
    after = evaluate_scenario(y_hat2, y, flags, Scenario.DISREGARD)
    assert base == after
    consider_before = evaluate_scenario(y_hat, y, flags, Scenario.CONSIDER)
    consider_after = evaluate_scenario(y_hat2, y, flags, Scenario.CONSIDER)
    assert consider_before != consider_after


def test_disregard_all_flagged_undefined(rng):
    y = rng.uniform(1, 10, 10)
    flags = np.full(10, FLAG_RULE, dtype=np.int8)
    with pytest.raises(UndefinedMetricError):
        evaluate_scenario(y, y, flags, Scenario.DISREGARD)


def backtest_dataset(pool, days=40):
    data = make_synth(pool, duration_days=days, seed=3)
    ds = data.aligned()
    boundary = ds.timestamps[0] + np.timedelta64((days - 10) * 24 * 3600, "s")
    return split(ds, np.datetime64(boundary, "s"), 0.2)


def test_daily_origins_are_midnights(pool):
    ds = backtest_dataset(pool)
    origins = daily_origins(ds, BacktestConfig())
    # one origin per test day: the past window may reach into the holdout
    assert len(origins) == 10
    for o in origins:
        ts = np.datetime64(ds.timestamps[o], "s").astype("datetime64[D]")
        assert np.datetime64(ds.timestamps[o], "s") == ts.astype("datetime64[s]")
        assert ds.roles[o] == ROLE_TEST


def test_run_backtest_report_shape(pool, oem_curve):
    ds = backtest_dataset(pool)
    mask = detect(ds)
    report = run_backtest(
        ds, mask, ["autowp", "oem"], ["none", "drop"],
        [s.value for s in Scenario], BacktestConfig(restarts=2),
        pool=pool, oem_curve=oem_curve, turbine_id="t",
    )
    assert report["schema"] == "windcurve-report-v1"
    entries = report["entries"]
    assert len(entries) == 2 * 2 * 2
    for e in entries:
        assert e["nrmse_mean"] >= e["nmae_mean"]
        assert e["n_samples"] > 0
        assert e["nmae_std"] == 0.0  # deterministic models
    # jobs>1 must give identical metrics
    report2 = run_backtest(
        ds, mask, ["autowp", "oem"], ["none", "drop"],
        [s.value for s in Scenario], BacktestConfig(restarts=2),
        pool=pool, oem_curve=oem_curve, turbine_id="t", jobs=2,
    )
    for a, b in zip(entries, report2["entries"]):
        assert a["nmae_mean"] == b["nmae_mean"]
        assert a["nrmse_mean"] == b["nrmse_mean"]


def test_run_backtest_arx_and_strategies(pool, oem_curve):
    ds = backtest_dataset(pool)
    mask = detect(ds)
    report = run_backtest(
        ds, mask, ["arx"], ["none", "imputation", "explanatory_variables"],
        ["consider_shutdowns"], BacktestConfig(),
        pool=pool, oem_curve=oem_curve,
    )
    assert len(report["entries"]) == 3
    for e in report["entries"]:
        assert np.isfinite(e["nmae_mean"])


def test_mlp_restart_std_positive(pool, oem_curve):
    ds = backtest_dataset(pool, days=30)
    mask = detect(ds)
    from windcurve.baselines import MlpConfig

    report = run_backtest(
        ds, mask, ["mlp"], ["none"], ["consider_shutdowns"],
        BacktestConfig(restarts=3),
        pool=pool, oem_curve=oem_curve,
        mlp_config=MlpConfig(hidden=(8,), max_epochs=15, restarts=1),
    )
    entry = report["entries"][0]
    assert entry["nmae_std"] >= 0.0
    assert np.isfinite(entry["nmae_mean"])
