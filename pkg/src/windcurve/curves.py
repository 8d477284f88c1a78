"""Power-curve library: parsing, resampling, normalization, pool selection,
and curve evaluation.

Curves are tabulated (wind speed, power) relationships.  Evaluation is linear
between nodes and zero outside the tabulated support, which encodes both the
cut-in and cut-out regimes; hold-at-rated plateaus must be tabulated
explicitly.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from ._kernels import interp_uniform
from .exceptions import CurveParseError, NormalizationError

logger = logging.getLogger(__name__)

# Uniform resampling grid: covers the 25 m/s cut-out with margin.
GRID_STEP = 0.1
GRID_MAX = 35.0

DEFAULT_POOL_SIZE = 10


@dataclass(frozen=True)
class PowerCurve:
    """Tabulated wind speed (m/s) to power (kW) relationship."""

    id: str
    wind_speeds: np.ndarray
    power_kw: np.ndarray
    reference_height: float | None = None

    def __post_init__(self):
        v = np.asarray(self.wind_speeds, dtype=np.float64)
        p = np.asarray(self.power_kw, dtype=np.float64)
        if v.ndim != 1 or v.size < 1 or v.shape != p.shape:
            raise ValueError("curve needs matching 1-d wind_speeds and power_kw")
        if v.size > 1 and np.any(np.diff(v) <= 0):
            raise ValueError(f"curve {self.id!r}: wind speeds must strictly increase")
        if np.any(p < 0):
            raise ValueError(f"curve {self.id!r}: power values must be non-negative")
        object.__setattr__(self, "wind_speeds", v)
        object.__setattr__(self, "power_kw", p)

    @property
    def peak_rating(self) -> float:
        return float(np.max(self.power_kw))


@dataclass(frozen=True)
class NormalizedPowerCurve:
    """Dimensionless curve on a uniform wind-speed grid starting at 0 m/s."""

    id: str
    grid_step: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"curve {self.id!r}: values must be finite")
        if np.max(vals) > 1.0 + 1e-9:
            raise ValueError(f"curve {self.id!r}: normalized values exceed 1")
        object.__setattr__(self, "values", vals)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.values.size) * self.grid_step


@dataclass(frozen=True)
class CurvePool:
    """Diversity-selected ensemble pool of normalized curves."""

    curves: tuple[NormalizedPowerCurve, ...]

    def __post_init__(self):
        if len(self.curves) < 1:
            raise ValueError("pool must contain at least one curve")
        ids = [c.id for c in self.curves]
        if len(set(ids)) != len(ids):
            raise ValueError("pool curve ids must be unique")
        object.__setattr__(self, "curves", tuple(self.curves))

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.curves]


def parse_curve_library(path) -> tuple[list[PowerCurve], int]:
    """Read a long-format ``id,v_ms,p_kw`` CSV into power curves.

    Entries without a complete curve (blank cells) are skipped; the number of
    skipped entries is returned alongside the curves.  Malformed numeric rows
    raise :class:`CurveParseError` with the line number.
    """
    points: dict[str, list[tuple[float, float]]] = {}
    incomplete: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:3]] != ["id", "v_ms", "p_kw"]:
            raise CurveParseError(f"{path}: expected header 'id,v_ms,p_kw'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                raise CurveParseError(f"{path}:{lineno}: expected 3 columns")
            cid = row[0].strip()
            if not cid:
                raise CurveParseError(f"{path}:{lineno}: empty curve id")
            v_raw, p_raw = row[1].strip(), row[2].strip()
            points.setdefault(cid, [])
            if not v_raw or not p_raw:
                incomplete.add(cid)
                continue
            try:
                points[cid].append((float(v_raw), float(p_raw)))
            except ValueError as exc:
                raise CurveParseError(f"{path}:{lineno}: {exc}") from None

    curves = []
    skipped = 0
    for cid, pts in points.items():
        if cid in incomplete or not pts:
            skipped += 1
            logger.warning("skipping curve %r: incomplete power curve", cid)
            continue
        v = np.array([p[0] for p in pts])
        p = np.array([p[1] for p in pts])
        try:
            curves.append(PowerCurve(id=cid, wind_speeds=v, power_kw=p))
        except ValueError as exc:
            raise CurveParseError(f"{path}: curve {cid!r}: {exc}") from None
    return curves, skipped


def resample_curve(
    curve: PowerCurve,
    grid_step: float = GRID_STEP,
    grid_max: float = GRID_MAX,
) -> PowerCurve:
    """Resample onto the uniform grid [0, grid_max], zero outside support."""
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    grid = np.round(np.arange(0.0, grid_max + grid_step / 2, grid_step), 10)
    values = np.interp(grid, curve.wind_speeds, curve.power_kw, left=0.0, right=0.0)
    return PowerCurve(
        id=curve.id,
        wind_speeds=grid,
        power_kw=values,
        reference_height=curve.reference_height,
    )


def normalize_curve(curve: PowerCurve, grid_step: float = GRID_STEP) -> NormalizedPowerCurve:
    """Divide a uniform-grid curve by its peak rating."""
    peak = curve.peak_rating
    if not peak > 0:
        raise NormalizationError(f"curve {curve.id!r} has zero peak rating")
    v = curve.wind_speeds
    if v[0] != 0.0 or (v.size > 1 and not np.allclose(np.diff(v), grid_step)):
        curve = resample_curve(curve, grid_step)
    return NormalizedPowerCurve(
        id=curve.id, grid_step=grid_step, values=curve.power_kw / peak
    )


def select_pool(
    curves: list[NormalizedPowerCurve], n_m: int = DEFAULT_POOL_SIZE
) -> CurvePool:
    """Sort curves by their summed normalized power and keep ``n_m`` of them
    at equally spaced ranks, always including the first and last.

    If the library holds at most ``n_m`` curves, all are kept (sorted).
    """
    if not curves:
        raise ValueError("curve list must be non-empty")
    order = sorted(curves, key=lambda c: (float(np.sum(c.values)), c.id))
    n = len(order)
    if n <= n_m:
        return CurvePool(curves=tuple(order))
    if n_m < 2:
        raise ValueError("n_m must be at least 2 when selection is needed")
    idx = np.floor(np.arange(n_m) * (n - 1) / (n_m - 1) + 0.5).astype(int)
    return CurvePool(curves=tuple(order[i] for i in idx))


def evaluate_curve(curve, v) -> np.ndarray | float:
    """Evaluate a curve at wind speed(s) ``v`` (m/s).

    Linear interpolation between nodes, zero outside the tabulated support
    (cut-in below, cut-out above).  Returns kW for a :class:`PowerCurve`, a
    dimensionless ratio for a :class:`NormalizedPowerCurve`.
    """
    v_arr = np.asarray(v, dtype=np.float64)
    scalar = v_arr.ndim == 0
    v_arr = np.atleast_1d(v_arr)
    if isinstance(curve, NormalizedPowerCurve):
        out = interp_uniform(0.0, curve.grid_step, curve.values, v_arr)
    else:
        out = np.interp(v_arr, curve.wind_speeds, curve.power_kw, left=0.0, right=0.0)
        outside = (v_arr < curve.wind_speeds[0]) | (v_arr > curve.wind_speeds[-1])
        out = np.where(outside, 0.0, out)
    return float(out[0]) if scalar else out
