import numpy as np
import pytest
from hypothesis import given, strategies as st

from windcurve.postprocess import ClipConfig, clip_forecast

CFG = ClipConfig(p_max=1500.0)


def test_hand_values():
    y = np.array([-5.0, 0.0, 700.0, 1500.0, 1700.0, 800.0, 1700.0])
    v = np.array([5.0, 5.0, 5.0, 5.0, 5.0, 26.0, 26.0])
    out = clip_forecast(y, v, CFG)
    np.testing.assert_allclose(out, [0.0, 0.0, 700.0, 1500.0, 1500.0, 0.0, 0.0])


def test_cut_out_boundary_forces_zero():
    out = clip_forecast(np.array([900.0]), np.array([25.0]), CFG)
    assert out[0] == 0.0


@given(
    y=st.lists(st.floats(-5000, 5000, allow_nan=False), min_size=1, max_size=50),
    v=st.lists(st.floats(0, 40, allow_nan=False), min_size=1, max_size=50),
)
def test_range_and_idempotence(y, v):
    n = min(len(y), len(v))
    y = np.array(y[:n])
    v = np.array(v[:n])
    out = clip_forecast(y, v, CFG)
    assert np.all(out >= 0.0) and np.all(out <= CFG.p_max)
    np.testing.assert_array_equal(clip_forecast(out, v, CFG), out)


def test_invalid_config():
    with pytest.raises(ValueError):
        ClipConfig(p_max=0.0)
