import json

import numpy as np
import pytest

from windcurve import fixture_library_path
from windcurve.curves import (
    normalize_curve,
    parse_curve_library,
    resample_curve,
    select_pool,
)
from windcurve.synthgen import SynthConfig, generate


@pytest.fixture(scope="session")
def library_curves():
    curves, skipped = parse_curve_library(fixture_library_path())
    assert skipped == 0
    return curves


@pytest.fixture(scope="session")
def pool(library_curves):
    return select_pool([normalize_curve(resample_curve(c)) for c in library_curves])


@pytest.fixture(scope="session")
def oem_curve(library_curves):
    return resample_curve(library_curves[0])


def make_synth(pool, **overrides):
    base = dict(
        seed=7,
        duration_days=60,
        peak_rating_kw=1500.0,
        true_weights=(0.0, 0.0, 0.0, 0.4, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0),
        forecast_sigma_ms=0.4,
        noise_sigma_kw=15.0,
    )
    base.update(overrides)
    return generate(SynthConfig(**base), pool)


@pytest.fixture(scope="session")
def synth(pool):
    return make_synth(pool)


def preset_config(name):
    from windcurve import preset_path

    return SynthConfig.from_json(json.loads(preset_path(name).read_text()))


def simplex_weights(rng, n):
    w = rng.exponential(size=n)
    return w / w.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
