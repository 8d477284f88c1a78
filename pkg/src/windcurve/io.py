"""CSV ingestion and emission for all series schemas.

All files are UTF-8, comma-separated, decimal point, header row, ISO-8601
timestamps.  Floats are written with 9 significant digits so identical runs
produce byte-identical files; missing values are empty cells.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .series import (
    DEFAULT_PERIOD,
    EnergySeries,
    HubWindSeries,
    PowerSeries,
    WeatherForecastFrame,
)
from .shutdown import FLAG_NAMES, ShutdownMask


def format_float(x: float) -> str:
    if not np.isfinite(x):
        return ""
    return f"{x:.9g}"


def _parse_float(cell: str) -> float:
    cell = cell.strip()
    return float(cell) if cell else np.nan


def _read_rows(path, expected_header: list[str]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != expected_header:
            raise ValueError(
                f"{path}: expected header {','.join(expected_header)!r}, got {header}"
            )
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    ts = np.array([np.datetime64(r[0].strip(), "s") for r in rows])
    cols = [
        np.array([_parse_float(r[i]) for r in rows])
        for i in range(1, len(expected_header))
    ]
    return ts, cols


def atomic_write(path, text: str) -> None:
    """Write via a temp file plus rename so partial files never appear."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _series_csv(header: str, timestamps, columns) -> str:
    lines = [header]
    for i, ts in enumerate(timestamps):
        cells = [str(np.datetime64(ts, "s"))]
        cells += [format_float(col[i]) for col in columns]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def read_energy_csv(path, period=DEFAULT_PERIOD) -> EnergySeries:
    ts, (values,) = _read_rows(path, ["timestamp", "energy_kwh"])
    return EnergySeries(ts, values, period=period)


def read_power_csv(path, peak_rating: float, period=DEFAULT_PERIOD) -> PowerSeries:
    ts, (values,) = _read_rows(path, ["timestamp", "power_kw"])
    return PowerSeries(ts, values, peak_rating=peak_rating, period=period)


def write_power_csv(path, series: PowerSeries) -> None:
    atomic_write(path, _series_csv("timestamp,power_kw", series.timestamps, [series.values]))


def read_wind_csv(path, period=DEFAULT_PERIOD) -> HubWindSeries:
    ts, (values,) = _read_rows(path, ["timestamp", "wind_ms"])
    return HubWindSeries(ts, values, period=period)


def write_wind_csv(path, series: HubWindSeries) -> None:
    atomic_write(path, _series_csv("timestamp,wind_ms", series.timestamps, [series.values]))


WEATHER_HEADER = ["timestamp", "v100_ms", "v10_ms", "dir_deg", "temp_c", "pressure_hpa"]


def read_weather_csv(path, period=DEFAULT_PERIOD) -> WeatherForecastFrame:
    ts, cols = _read_rows(path, WEATHER_HEADER)
    v100, v10, direction, temperature, pressure = cols
    return WeatherForecastFrame(
        timestamps=ts,
        v100=v100,
        v10=None if np.all(np.isnan(v10)) else v10,
        direction=direction,
        temperature=temperature,
        pressure=pressure,
        period=period,
    )


def write_weather_csv(path, frame: WeatherForecastFrame) -> None:
    v10 = frame.v10 if frame.v10 is not None else np.full(frame.timestamps.size, np.nan)
    text = _series_csv(
        ",".join(WEATHER_HEADER),
        frame.timestamps,
        [frame.v100, v10, frame.direction, frame.temperature, frame.pressure],
    )
    atomic_write(path, text)


def write_mask_csv(path, mask: ShutdownMask) -> None:
    lines = ["timestamp,flag,source"]
    for ts, flag in zip(mask.timestamps, mask.flags):
        lines.append(f"{np.datetime64(ts, 's')},{FLAG_NAMES[int(flag)]},{mask.source}")
    atomic_write(path, "\n".join(lines) + "\n")


def read_mask_csv(path) -> ShutdownMask:
    name_to_flag = {name: code for code, name in FLAG_NAMES.items()}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["timestamp", "flag", "source"]:
            raise ValueError(f"{path}: expected header 'timestamp,flag,source'")
        rows = [row for row in reader if row]
    ts = np.array([np.datetime64(r[0].strip(), "s") for r in rows])
    flags = np.array([name_to_flag[r[1].strip()] for r in rows], dtype=np.int8)
    source = rows[0][2].strip() if rows else "unknown"
    return ShutdownMask(ts, flags, source=source)


def write_curve_csv(path, curve) -> None:
    lines = ["id,v_ms,p_kw"]
    for v, p in zip(curve.wind_speeds, curve.power_kw):
        lines.append(f"{curve.id},{format_float(v)},{format_float(p)}")
    atomic_write(path, "\n".join(lines) + "\n")


def write_json(path, doc: dict) -> None:
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
