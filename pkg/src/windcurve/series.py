"""Time-indexed series types, unit transforms, calendar features, and
dataset alignment/splitting.

All series carry a uniform sampling period (15 minutes by default) and
represent missing values explicitly as NaN.  Types are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import AlignmentError, InvalidPeriodError, SplitError

DEFAULT_PERIOD = np.timedelta64(15, "m")

ROLE_UNASSIGNED = -1
ROLE_TRAIN = 0
ROLE_HOLDOUT = 1
ROLE_TEST = 2


def _as_timestamps(values) -> np.ndarray:
    ts = np.asarray(values, dtype="datetime64[s]")
    if ts.ndim != 1 or ts.size < 1:
        raise ValueError("timestamps must be a non-empty 1-d array")
    return ts


def _check_uniform(ts: np.ndarray, period: np.timedelta64) -> None:
    if ts.size > 1:
        deltas = np.diff(ts)
        if not np.all(deltas == period.astype("m8[s]")):
            raise ValueError(
                "timestamps must be strictly increasing with uniform "
                f"spacing equal to the declared period {period}"
            )


def _as_values(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have the same length as timestamps")
    return arr


@dataclass(frozen=True)
class EnergySeries:
    """Metered energy in kWh per sample period."""

    timestamps: np.ndarray
    values: np.ndarray
    period: np.timedelta64 = DEFAULT_PERIOD

    def __post_init__(self):
        ts = _as_timestamps(self.timestamps)
        _check_uniform(ts, self.period)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", _as_values(self.values, ts.size, "values"))


@dataclass(frozen=True)
class PowerSeries:
    """Mean power generation in kW with the turbine's peak rating."""

    timestamps: np.ndarray
    values: np.ndarray
    peak_rating: float
    period: np.timedelta64 = DEFAULT_PERIOD

    def __post_init__(self):
        ts = _as_timestamps(self.timestamps)
        _check_uniform(ts, self.period)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", _as_values(self.values, ts.size, "values"))
        if not self.peak_rating > 0:
            raise ValueError("peak_rating must be positive")


@dataclass(frozen=True)
class HubWindSeries:
    """Measured wind speed at hub height (m/s)."""

    timestamps: np.ndarray
    values: np.ndarray
    period: np.timedelta64 = DEFAULT_PERIOD

    def __post_init__(self):
        ts = _as_timestamps(self.timestamps)
        _check_uniform(ts, self.period)
        object.__setattr__(self, "timestamps", ts)
        values = _as_values(self.values, ts.size, "values")
        if np.any(values[np.isfinite(values)] < 0):
            raise ValueError("wind speeds must be non-negative")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class WeatherForecastFrame:
    """Day-ahead weather forecast covariates on a shared time index."""

    timestamps: np.ndarray
    v100: np.ndarray
    direction: np.ndarray
    temperature: np.ndarray
    pressure: np.ndarray
    v10: np.ndarray | None = None
    period: np.timedelta64 = DEFAULT_PERIOD

    def __post_init__(self):
        ts = _as_timestamps(self.timestamps)
        _check_uniform(ts, self.period)
        object.__setattr__(self, "timestamps", ts)
        n = ts.size
        for name in ("v100", "direction", "temperature", "pressure"):
            object.__setattr__(self, name, _as_values(getattr(self, name), n, name))
        if self.v10 is not None:
            object.__setattr__(self, "v10", _as_values(self.v10, n, "v10"))
        v100 = self.v100
        if np.any(v100[np.isfinite(v100)] < 0):
            raise ValueError("v100 must be non-negative where present")
        direction = self.direction
        finite_dir = direction[np.isfinite(direction)]
        if np.any(finite_dir < 0) or np.any(finite_dir >= 360):
            raise ValueError("direction must lie in [0, 360)")


@dataclass(frozen=True)
class AlignedDataset:
    """Inner join of power, hub wind, and weather forecast on timestamps.

    ``roles`` tags every row as train / early-stop-holdout / test (or
    unassigned before :func:`split`).  ``extra`` holds feature columns
    appended by the shutdown-handling strategies.
    """

    timestamps: np.ndarray
    power: np.ndarray
    hub_wind: np.ndarray
    v100: np.ndarray
    direction: np.ndarray
    temperature: np.ndarray
    pressure: np.ndarray
    peak_rating: float
    period: np.timedelta64 = DEFAULT_PERIOD
    roles: np.ndarray = None
    extra: dict = field(default_factory=dict)
    n_dropped: int = 0

    def __post_init__(self):
        ts = _as_timestamps(self.timestamps)
        object.__setattr__(self, "timestamps", ts)
        n = ts.size
        for name in ("power", "hub_wind", "v100", "direction", "temperature", "pressure"):
            object.__setattr__(self, name, _as_values(getattr(self, name), n, name))
        if self.roles is None:
            object.__setattr__(self, "roles", np.full(n, ROLE_UNASSIGNED, dtype=np.int8))
        else:
            roles = np.asarray(self.roles, dtype=np.int8)
            if roles.shape != (n,):
                raise ValueError("roles must match timestamps length")
            object.__setattr__(self, "roles", roles)

    def __len__(self) -> int:
        return self.timestamps.size

    @property
    def train_mask(self) -> np.ndarray:
        return self.roles == ROLE_TRAIN

    @property
    def holdout_mask(self) -> np.ndarray:
        return self.roles == ROLE_HOLDOUT

    @property
    def test_mask(self) -> np.ndarray:
        return self.roles == ROLE_TEST

    def take(self, index) -> "AlignedDataset":
        """Row subset preserving all columns and role tags."""
        return replace(
            self,
            timestamps=self.timestamps[index],
            power=self.power[index],
            hub_wind=self.hub_wind[index],
            v100=self.v100[index],
            direction=self.direction[index],
            temperature=self.temperature[index],
            pressure=self.pressure[index],
            roles=self.roles[index],
            extra={k: v[index] for k, v in self.extra.items()},
        )

    def with_power(self, power: np.ndarray) -> "AlignedDataset":
        return replace(self, power=np.asarray(power, dtype=np.float64))

    def with_roles(self, roles: np.ndarray) -> "AlignedDataset":
        return replace(self, roles=roles)

    def with_extra(self, extra: dict) -> "AlignedDataset":
        return replace(self, extra=dict(extra))


def energy_to_power(energy: EnergySeries, peak_rating: float) -> PowerSeries:
    """Convert metered energy per period into mean power (kW)."""
    hours = energy.period / np.timedelta64(1, "h")
    if not hours > 0:
        raise InvalidPeriodError(f"sample period must be positive, got {energy.period}")
    return PowerSeries(
        timestamps=energy.timestamps,
        values=energy.values / hours,
        peak_rating=peak_rating,
        period=energy.period,
    )


def day_of_year(timestamps: np.ndarray, tz_offset_minutes: int = 0) -> np.ndarray:
    """1-based day of year; leap day is day 366."""
    ts = np.asarray(timestamps, dtype="datetime64[s]") + np.timedelta64(
        tz_offset_minutes, "m"
    )
    days = ts.astype("datetime64[D]")
    years = days.astype("datetime64[Y]").astype("datetime64[D]")
    return (days - years).astype(np.int64) + 1


def minute_of_day(timestamps: np.ndarray, tz_offset_minutes: int = 0) -> np.ndarray:
    ts = np.asarray(timestamps, dtype="datetime64[s]") + np.timedelta64(
        tz_offset_minutes, "m"
    )
    minutes = ts.astype("datetime64[m]")
    days = ts.astype("datetime64[D]").astype("datetime64[m]")
    return (minutes - days).astype(np.int64)


def cyclic_features(timestamps: np.ndarray, tz_offset_minutes: int = 0):
    """Sine/cosine encodings of day-of-year (365 denominator, also on leap
    days) and minute-of-day (1440 denominator).

    Returns ``(x_s365, x_c365, x_s1440, x_c1440)``.
    """
    day = day_of_year(timestamps, tz_offset_minutes)
    minute = minute_of_day(timestamps, tz_offset_minutes)
    ang_year = 2.0 * np.pi * day / 365.0
    ang_day = 2.0 * np.pi * minute / 1440.0
    return np.sin(ang_year), np.cos(ang_year), np.sin(ang_day), np.cos(ang_day)


def night_indicator(
    timestamps: np.ndarray,
    window: tuple[int, int],
    tz_offset_minutes: int = 0,
) -> np.ndarray:
    """1 where the minute of day falls inside ``[start, end)``.

    The window may wrap midnight (start > end); ``start == end`` is the empty
    window.
    """
    start, end = window
    if not (0 <= start < 1440 and 0 <= end < 1440):
        raise ValueError("night window minutes must lie in [0, 1440)")
    minute = minute_of_day(timestamps, tz_offset_minutes)
    if start == end:
        return np.zeros(minute.shape, dtype=np.float64)
    if start < end:
        inside = (minute >= start) & (minute < end)
    else:
        inside = (minute >= start) | (minute < end)
    return inside.astype(np.float64)


def align(
    power: PowerSeries,
    hub: HubWindSeries,
    weather: WeatherForecastFrame,
) -> AlignedDataset:
    """Inner join on timestamps, dropping rows that miss power or v100.

    Hub wind may be missing (NaN) on retained rows; it is mandatory only for
    operations that consume it (e.g. imputation).
    """
    common, pi, wi = np.intersect1d(
        power.timestamps, weather.timestamps, return_indices=True
    )
    if common.size == 0:
        raise AlignmentError("power and weather series have no common timestamps")
    common2, ci, hi = np.intersect1d(common, hub.timestamps, return_indices=True)
    if common2.size == 0:
        raise AlignmentError("hub wind series shares no timestamps with the others")
    pi, wi = pi[ci], wi[ci]

    p = power.values[pi]
    v100 = weather.v100[wi]
    keep = np.isfinite(p) & np.isfinite(v100)
    n_dropped = int(np.sum(~keep))
    if not np.any(keep):
        raise AlignmentError("no rows remain after dropping missing power/v100")

    return AlignedDataset(
        timestamps=common2[keep],
        power=p[keep],
        hub_wind=hub.values[hi][keep],
        v100=v100[keep],
        direction=weather.direction[wi][keep],
        temperature=weather.temperature[wi][keep],
        pressure=weather.pressure[wi][keep],
        peak_rating=power.peak_rating,
        period=power.period,
        n_dropped=n_dropped,
    )


def split(
    ds: AlignedDataset,
    boundary: np.datetime64,
    holdout_fraction: float = 0.2,
) -> AlignedDataset:
    """Tag rows before ``boundary`` as train (with a chronological-tail
    holdout of ``holdout_fraction``) and rows at/after it as test."""
    if not 0 <= holdout_fraction < 1:
        raise ValueError("holdout_fraction must lie in [0, 1)")
    boundary = np.datetime64(boundary, "s")
    ts = ds.timestamps
    if boundary <= ts[0] or boundary > ts[-1]:
        raise SplitError(
            f"boundary {boundary} outside dataset range ({ts[0]}, {ts[-1]}]"
        )
    roles = np.where(ts < boundary, ROLE_TRAIN, ROLE_TEST).astype(np.int8)
    n_train = int(np.sum(roles == ROLE_TRAIN))
    n_holdout = int(round(n_train * holdout_fraction))
    if n_holdout > 0:
        train_idx = np.flatnonzero(roles == ROLE_TRAIN)
        roles[train_idx[-n_holdout:]] = ROLE_HOLDOUT
    return ds.with_roles(roles)
