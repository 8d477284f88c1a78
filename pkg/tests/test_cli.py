import json
import os

import numpy as np
import pytest

from windcurve import preset_path
from windcurve.cli import main


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    rc = main(
        [
            "generate",
            "--config", str(preset_path("turbine2")),
            "--out", str(out),
        ]
    )
    assert rc == 0
    return out


def run_config(bundle, tmp_path, **overrides):
    cfg = {
        "power_csv": str(bundle / "power.csv"),
        "wind_csv": str(bundle / "hub_wind.csv"),
        "weather_csv": str(bundle / "weather.csv"),
        "peak_rating_kw": 2000.0,
        "split_boundary": "2019-07-01T00:00:00",
        "holdout_fraction": 0.2,
        "turbine_id": "turbine2",
        "models": ["autowp", "oem"],
        "strategies": ["none"],
        "backtest": {"restarts": 2},
    }
    cfg.update(overrides)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    return path


def test_generate_bundle_contents(bundle):
    names = sorted(p.name for p in bundle.iterdir())
    assert names == [
        "hub_wind.csv", "manifest.json", "power.csv",
        "truth_curve.csv", "truth_mask.csv", "weather.csv",
    ]
    manifest = json.loads((bundle / "manifest.json").read_text())
    assert manifest["n_rows"] == manifest["duration_days"] * 96


def test_detect_writes_mask(bundle, tmp_path, capsys):
    cfg = run_config(bundle, tmp_path)
    rc = main(["detect", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "mask.csv").exists()
    assert "flagged" in capsys.readouterr().out


def test_fit_writes_models(bundle, tmp_path):
    cfg = run_config(bundle, tmp_path)
    rc = main(
        ["fit", "--config", str(cfg), "--out", str(tmp_path),
         "--models", "autowp", "oem", "arx"]
    )
    assert rc == 0
    doc = json.loads((tmp_path / "model_autowp.json").read_text())
    assert doc["schema"] == "windcurve-ensemble-v1"
    weights = np.array(doc["weights"])
    assert abs(weights.sum() - 1.0) <= 1e-9
    assert json.loads((tmp_path / "model_arx.json").read_text())["schema"] == (
        "windcurve-arx-v1"
    )


def test_forecast_from_model_file(bundle, tmp_path):
    cfg = run_config(bundle, tmp_path)
    assert main(["fit", "--config", str(cfg), "--out", str(tmp_path),
                 "--models", "autowp", "arx"]) == 0
    out = tmp_path / "fc.csv"
    rc = main(
        ["forecast", "--model", str(tmp_path / "model_autowp.json"),
         "--weather", str(bundle / "weather.csv"),
         "--origin", "2019-08-01T00:00:00", "--out", str(out)]
    )
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "timestamp,power_kw"
    assert len(lines) == 97


def test_forecast_arx_requires_history(bundle, tmp_path, capsys):
    cfg = run_config(bundle, tmp_path)
    assert main(["fit", "--config", str(cfg), "--out", str(tmp_path),
                 "--models", "arx"]) == 0
    rc = main(
        ["forecast", "--model", str(tmp_path / "model_arx.json"),
         "--weather", str(bundle / "weather.csv"),
         "--origin", "2019-08-01T00:00:00", "--out", str(tmp_path / "fc.csv")]
    )
    assert rc == 1
    assert "ERROR" in capsys.readouterr().err


def test_backtest_outputs_and_reproducibility(bundle, tmp_path):
    cfg = run_config(bundle, tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    for out in (out1, out2):
        rc = main(["backtest", "--config", str(cfg), "--out", str(out),
                   "--seed", "0"])
        assert rc == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "forecasts.csv").read_bytes() == (out2 / "forecasts.csv").read_bytes()
    report = json.loads((out1 / "report.json").read_text())
    assert report["schema"] == "windcurve-report-v1"
    assert {e["model"] for e in report["entries"]} == {"autowp", "oem"}


def test_cli_flag_overrides(bundle, tmp_path):
    cfg = run_config(bundle, tmp_path)
    out = tmp_path / "o3"
    rc = main(["backtest", "--config", str(cfg), "--out", str(out),
               "--models", "oem", "--scenarios", "consider_shutdowns"])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert {e["model"] for e in report["entries"]} == {"oem"}
    assert {e["scenario"] for e in report["entries"]} == {"consider_shutdowns"}


def test_missing_config_errors(tmp_path, capsys):
    rc = main(["detect", "--config", str(tmp_path / "nope.json")])
    assert rc == 1
    assert "ERROR" in capsys.readouterr().err


def test_unknown_model_errors(bundle, tmp_path, capsys):
    cfg = run_config(bundle, tmp_path)
    rc = main(["fit", "--config", str(cfg), "--out", str(tmp_path),
               "--models", "nonsense"])
    assert rc == 1
    assert "ERROR" in capsys.readouterr().err


def test_generate_seed_override(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["generate", "--config", str(preset_path("turbine2")),
                     "--out", str(out), "--seed", "99"]) == 0
    assert (a / "power.csv").read_bytes() == (b / "power.csv").read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["seed"] == 99
