import numpy as np
import pytest

from windcurve.curves import evaluate_curve
from windcurve.synthgen import (
    IrregularShutdownSpec,
    RegularShutdownSpec,
    SynthConfig,
    generate,
    true_curve_from_weights,
)
from tests.conftest import make_synth, preset_config


def test_same_seed_identical(pool):
    a = make_synth(pool, seed=42)
    b = make_synth(pool, seed=42)
    np.testing.assert_array_equal(a.power.values, b.power.values)
    np.testing.assert_array_equal(a.hub_wind.values, b.hub_wind.values)
    np.testing.assert_array_equal(a.weather.v100, b.weather.v100)
    np.testing.assert_array_equal(a.truth_flags, b.truth_flags)


def test_different_seed_differs(pool):
    a = make_synth(pool, seed=1)
    b = make_synth(pool, seed=2)
    assert not np.array_equal(a.power.values, b.power.values)


def test_shutdown_steps_have_zero_power(pool):
    data = make_synth(pool, irregular_shutdowns=IrregularShutdownSpec(3.0, 12))
    flagged = data.truth_flags.astype(bool)
    assert flagged.any()
    np.testing.assert_array_equal(data.power.values[flagged], 0.0)


def test_noise_free_power_matches_true_curve(pool):
    data = make_synth(pool, noise_sigma_kw=0.0, forecast_sigma_ms=0.0)
    clean = ~data.truth_flags.astype(bool)
    expect = evaluate_curve(data.true_curve, data.hub_wind.values[clean])
    np.testing.assert_allclose(data.power.values[clean], expect, atol=1e-9)


def test_regular_window_and_weekdays(pool):
    spec = RegularShutdownSpec(window=(1320, 360), active_weekdays=(0, 1, 2, 3, 4))
    data = make_synth(pool, regular_shutdowns=spec, duration_days=21)
    ts = data.power.timestamps
    weekday = ((ts.astype("datetime64[D]").astype(np.int64) + 3) % 7).astype(int)
    minutes = (ts.astype("datetime64[m]") - ts.astype("datetime64[D]").astype(
        "datetime64[m]"
    )).astype(np.int64)
    in_window = (minutes >= 1320) | (minutes < 360)
    expect = in_window & np.isin(weekday, (0, 1, 2, 3, 4))
    np.testing.assert_array_equal(data.truth_flags.astype(bool), expect)


def test_true_curve_from_weights_peak(pool):
    w = np.zeros(len(pool))
    w[0], w[7] = 0.5, 0.5
    curve = true_curve_from_weights(pool, w, 1800.0)
    assert curve.peak_rating == pytest.approx(1800.0)


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        SynthConfig(true_weights=(0.5, 0.2))  # not on the simplex
    with pytest.raises(ValueError):
        SynthConfig(ar1_persistence=1.0)
    with pytest.raises(ValueError):
        SynthConfig(noise_sigma_kw=-1.0)


def test_forecast_bias_shifts_v100(pool):
    a = make_synth(pool, forecast_bias_ms=0.0, forecast_sigma_ms=0.0)
    b = make_synth(pool, forecast_bias_ms=1.0, forecast_sigma_ms=0.0)
    np.testing.assert_allclose(b.weather.v100 - a.weather.v100, 1.0, atol=1e-9)


@pytest.mark.parametrize("name,target,tol", [("turbine1", 0.49, 0.05), ("turbine2", 0.21, 0.05)])
def test_preset_truth_shares(pool, name, target, tol):
    cfg = preset_config(name)
    data = generate(cfg, pool)
    share = float(np.mean(data.truth_flags))
    assert abs(share - target) < tol


def test_aligned_roundtrip(synth):
    ds = synth.aligned()
    assert len(ds) == synth.power.timestamps.size
    np.testing.assert_array_equal(ds.power, synth.power.values)
    np.testing.assert_array_equal(ds.v100, synth.weather.v100)
