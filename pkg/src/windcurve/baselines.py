"""Comparison forecasters: the OEM-curve forecaster, a from-scratch MLP
curve regressor, and a ridge-regularized ARX model standing in for
autoregressive methods (it exercises the same past-horizon pipeline)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curves import PowerCurve, evaluate_curve
from .exceptions import FitError
from .height import HeightCorrectionModel, correct_forecast
from .series import AlignedDataset, ROLE_HOLDOUT, ROLE_TRAIN, cyclic_features, night_indicator


# ---------------------------------------------------------------------------
# OEM curve forecaster
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OemCurveForecaster:
    """Height-corrected lookup in a single OEM power curve."""

    curve: PowerCurve
    height_model: HeightCorrectionModel

    def forecast(self, v100: np.ndarray) -> np.ndarray:
        v_eff = correct_forecast(v100, self.height_model)
        return np.asarray(evaluate_curve(self.curve, v_eff), dtype=np.float64)


# ---------------------------------------------------------------------------
# MLP curve regressor
# ---------------------------------------------------------------------------

def weather_features(v100, direction, temperature, pressure) -> np.ndarray:
    """Stack the static-regression covariates; direction enters as a
    (sin, cos) pair to avoid the 0/360 discontinuity."""
    rad = np.deg2rad(np.asarray(direction, dtype=np.float64))
    return np.column_stack(
        [
            np.asarray(v100, dtype=np.float64),
            np.sin(rad),
            np.cos(rad),
            np.asarray(temperature, dtype=np.float64),
            np.asarray(pressure, dtype=np.float64),
        ]
    )


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (32, 32)
    learning_rate: float = 0.05
    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 10
    restarts: int = 5


@dataclass
class MlpRegressor:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    config: MlpConfig
    seed: int
    holdout_loss: float


def _init_params(rng: np.random.Generator, sizes: list[int]):
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = np.sqrt(1.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def mlp_forward(weights, biases, x: np.ndarray) -> np.ndarray:
    h = x
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.tanh(h @ w + b)
    return (h @ weights[-1] + biases[-1])[:, 0]


def mlp_loss_and_grad(weights, biases, x: np.ndarray, y: np.ndarray):
    """Mean squared error and its analytic gradients (backpropagation)."""
    acts = [x]
    h = x
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.tanh(h @ w + b)
        acts.append(h)
    pred = (h @ weights[-1] + biases[-1])[:, 0]
    err = pred - y
    n = y.shape[0]
    loss = float(np.mean(err**2))

    grad_w = [None] * len(weights)
    grad_b = [None] * len(biases)
    delta = (2.0 / n) * err[:, None]
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = acts[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (1.0 - acts[layer] ** 2)
    return loss, grad_w, grad_b


def _train_once(x, y, x_val, y_val, cfg: MlpConfig, rng: np.random.Generator):
    sizes = [x.shape[1], *cfg.hidden, 1]
    weights, biases = _init_params(rng, sizes)
    best = (float("inf"), [w.copy() for w in weights], [b.copy() for b in biases])
    stall = 0
    n = x.shape[0]
    for _ in range(cfg.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss, grad_w, grad_b = mlp_loss_and_grad(weights, biases, x[batch], y[batch])
            if not np.isfinite(loss):
                raise FitError(f"non-finite training loss {loss}")
            for layer in range(len(weights)):
                weights[layer] -= cfg.learning_rate * grad_w[layer]
                biases[layer] -= cfg.learning_rate * grad_b[layer]
        val_loss = float(np.mean((mlp_forward(weights, biases, x_val) - y_val) ** 2))
        if val_loss < best[0]:
            best = (val_loss, [w.copy() for w in weights], [b.copy() for b in biases])
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                break
    return best


def fit_mlp(
    x: np.ndarray,
    y: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    config: MlpConfig = MlpConfig(),
    seed: int = 0,
) -> MlpRegressor:
    """Train with mini-batch gradient descent, early stopping on the holdout
    loss, and ``restarts`` independent initializations (best holdout wins).

    Standardization constants come from the training rows only.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] < 1 or x_val.shape[0] < 1:
        raise FitError("need at least one training and one holdout row")
    x_mean = x.mean(axis=0)
    x_std = np.where(x.std(axis=0) > 0, x.std(axis=0), 1.0)
    y_mean = float(y.mean())
    y_std = float(y.std()) or 1.0
    xs = (x - x_mean) / x_std
    ys = (y - y_mean) / y_std
    xvs = (np.asarray(x_val, dtype=np.float64) - x_mean) / x_std
    yvs = (np.asarray(y_val, dtype=np.float64) - y_mean) / y_std

    best = None
    for restart in range(config.restarts):
        rng = np.random.default_rng(seed * 10_000 + restart)
        candidate = _train_once(xs, ys, xvs, yvs, config, rng)
        if best is None or candidate[0] < best[0]:
            best = candidate
    val_loss, weights, biases = best
    return MlpRegressor(
        weights=weights,
        biases=biases,
        x_mean=x_mean,
        x_std=x_std,
        y_mean=y_mean,
        y_std=y_std,
        config=config,
        seed=seed,
        holdout_loss=val_loss,
    )


def predict_mlp(model: MlpRegressor, x: np.ndarray) -> np.ndarray:
    xs = (np.asarray(x, dtype=np.float64) - model.x_mean) / model.x_std
    return mlp_forward(model.weights, model.biases, xs) * model.y_std + model.y_mean


# ---------------------------------------------------------------------------
# ARX baseline
# ---------------------------------------------------------------------------

PAST_HORIZON = 96

EXOG_NAMES = ("v100", "sin_dir", "cos_dir", "temperature", "pressure",
              "x_s365", "x_c365", "x_s1440", "x_c1440")


@dataclass(frozen=True)
class ArxConfig:
    lags: tuple[int, ...] = (1, 2, 3, 4, 96)
    ridge: float = 1e-6
    use_explanatory: bool = False
    night_window: tuple[int, int] = (22 * 60, 6 * 60)

    def __post_init__(self):
        if any(l < 1 or l > PAST_HORIZON for l in self.lags):
            raise ValueError(f"lags must lie in 1..{PAST_HORIZON}")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")


@dataclass
class ArxModel:
    config: ArxConfig
    coef: np.ndarray
    intercept: float
    feat_mean: np.ndarray
    feat_std: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def raw_coefficients(self) -> tuple[np.ndarray, float]:
        """Coefficients mapped back to unstandardized feature space."""
        coef = self.coef / self.feat_std
        intercept = self.intercept - float(np.sum(self.coef * self.feat_mean / self.feat_std))
        return coef, intercept


def _exog_matrix(ds_like, cfg: ArxConfig):
    ts, v100 = ds_like["timestamps"], ds_like["v100"]
    rad = np.deg2rad(ds_like["direction"])
    xs365, xc365, xs1440, xc1440 = cyclic_features(ts)
    cols = [v100, np.sin(rad), np.cos(rad), ds_like["temperature"], ds_like["pressure"],
            xs365, xc365, xs1440, xc1440]
    names = list(EXOG_NAMES)
    if cfg.use_explanatory:
        cols.append(night_indicator(ts, cfg.night_window))
        names.append("night")
    return np.column_stack(cols), names


def _timeline(ds: AlignedDataset):
    """Scatter training rows onto a contiguous quarter-hour timeline so lag
    access survives dropped rows (gaps stay NaN)."""
    step = ds.period.astype("m8[s]")
    pos = ((ds.timestamps - ds.timestamps[0]) / step).astype(np.int64)
    n = int(pos[-1]) + 1
    out = {}
    for name in ("power", "v100", "direction", "temperature", "pressure"):
        arr = np.full(n, np.nan)
        arr[pos] = getattr(ds, name)
        out[name] = arr
    for name, values in ds.extra.items():
        arr = np.full(n, np.nan)
        arr[pos] = values
        out[name] = arr
    out["timestamps"] = ds.timestamps[0] + np.arange(n) * step
    roles = np.full(n, -9, dtype=np.int8)
    roles[pos] = ds.roles
    out["roles"] = roles
    return out


def fit_arx(ds: AlignedDataset, config: ArxConfig = ArxConfig()) -> ArxModel:
    """Ridge least squares of next-step power on lagged power, exogenous
    forecasts, and cyclic features over the training rows."""
    train = ds.take((ds.roles == ROLE_TRAIN) | (ds.roles == ROLE_HOLDOUT))
    if len(train) <= max(config.lags):
        raise FitError("not enough training rows to form the lagged design")
    line = _timeline(train)
    y = line["power"]
    exog, exog_names = _exog_matrix(line, config)

    lag_cols = [np.roll(y, lag) for lag in config.lags]
    names = [f"y_lag{lag}" for lag in config.lags]
    if config.use_explanatory:
        if "x_sd" not in line or "y_wpc" not in line:
            raise FitError(
                "explanatory ARX needs x_sd / y_wpc columns; apply the "
                "explanatory-variables training strategy first"
            )
        for lag in config.lags:
            lag_cols.append(np.roll(line["x_sd"], lag))
            names.append(f"x_sd_lag{lag}")
        for lag in config.lags:
            lag_cols.append(np.roll(line["y_wpc"], lag))
            names.append(f"y_wpc_lag{lag}")
    design = np.column_stack(lag_cols + [exog])
    names += exog_names

    max_lag = max(config.lags)
    valid = np.zeros(y.shape[0], dtype=bool)
    valid[max_lag:] = True
    valid &= np.isfinite(y) & np.all(np.isfinite(design), axis=1)
    if not np.any(valid):
        raise FitError("no valid design rows after lagging")
    a = design[valid]
    target = y[valid]

    mean = a.mean(axis=0)
    std = a.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    a_std = (a - mean) / std
    a_full = np.column_stack([a_std, np.ones(a_std.shape[0])])
    gram = a_full.T @ a_full
    penalty = np.eye(gram.shape[0]) * config.ridge
    penalty[-1, -1] = 0.0  # intercept unpenalized
    g = gram + penalty
    if config.ridge == 0 and np.linalg.cond(g) > 1e12:
        raise FitError("singular normal equations; refit with ridge > 0")
    beta = np.linalg.solve(g, a_full.T @ target)
    return ArxModel(
        config=config,
        coef=beta[:-1],
        intercept=float(beta[-1]),
        feat_mean=mean,
        feat_std=std,
        feature_names=names,
    )


def predict_arx(
    model: ArxModel,
    past_power: np.ndarray,
    future_cov: dict,
    past_x_sd: np.ndarray | None = None,
    past_y_wpc: np.ndarray | None = None,
) -> np.ndarray:
    """Recursive multi-step forecast over the day-ahead horizon.

    ``past_power`` is the strategy-processed past horizon (oldest first);
    forecasts feed back as lagged inputs.  ``future_cov`` supplies
    ``timestamps, v100, direction, temperature, pressure`` arrays over the
    horizon.  For explanatory models the shutdown label is assumed 0 past
    the origin and the theoretical power lag reuses the fed-back forecast.
    """
    cfg = model.config
    past_power = np.asarray(past_power, dtype=np.float64)
    max_lag = max(cfg.lags)
    if past_power.shape[0] < max_lag:
        raise ValueError(f"past window shorter than the maximum lag {max_lag}")
    if not np.all(np.isfinite(past_power)):
        raise ValueError("past power window contains missing values")
    exog, _ = _exog_matrix(future_cov, cfg)
    horizon = exog.shape[0]

    hist_y = list(past_power)
    if cfg.use_explanatory:
        if past_x_sd is None or past_y_wpc is None:
            raise ValueError("explanatory ARX needs past x_sd and y_wpc windows")
        hist_sd = list(np.asarray(past_x_sd, dtype=np.float64))
        hist_wpc = list(np.asarray(past_y_wpc, dtype=np.float64))

    out = np.empty(horizon)
    for step in range(horizon):
        feats = [hist_y[-lag] for lag in cfg.lags]
        if cfg.use_explanatory:
            feats += [hist_sd[-lag] for lag in cfg.lags]
            feats += [hist_wpc[-lag] for lag in cfg.lags]
        feats = np.concatenate([np.asarray(feats, dtype=np.float64), exog[step]])
        feats = (feats - model.feat_mean) / model.feat_std
        value = float(feats @ model.coef) + model.intercept
        out[step] = value
        hist_y.append(value)
        if cfg.use_explanatory:
            hist_sd.append(0.0)
            hist_wpc.append(value)
    return out


# ---------------------------------------------------------------------------
# Model serialization
# ---------------------------------------------------------------------------

def mlp_to_json(model: MlpRegressor) -> str:
    doc = {
        "schema": "windcurve-mlp-v1",
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "x_mean": model.x_mean.tolist(),
        "x_std": model.x_std.tolist(),
        "y_mean": model.y_mean,
        "y_std": model.y_std,
        "seed": model.seed,
        "holdout_loss": model.holdout_loss,
        "config": {
            "hidden": list(model.config.hidden),
            "learning_rate": model.config.learning_rate,
            "batch_size": model.config.batch_size,
            "max_epochs": model.config.max_epochs,
            "patience": model.config.patience,
            "restarts": model.config.restarts,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def mlp_from_json(text: str) -> MlpRegressor:
    doc = json.loads(text)
    if doc.get("schema") != "windcurve-mlp-v1":
        raise ValueError(f"unexpected MLP schema {doc.get('schema')!r}")
    cfg = doc["config"]
    return MlpRegressor(
        weights=[np.asarray(w) for w in doc["weights"]],
        biases=[np.asarray(b) for b in doc["biases"]],
        x_mean=np.asarray(doc["x_mean"]),
        x_std=np.asarray(doc["x_std"]),
        y_mean=doc["y_mean"],
        y_std=doc["y_std"],
        config=MlpConfig(
            hidden=tuple(cfg["hidden"]),
            learning_rate=cfg["learning_rate"],
            batch_size=cfg["batch_size"],
            max_epochs=cfg["max_epochs"],
            patience=cfg["patience"],
            restarts=cfg["restarts"],
        ),
        seed=doc["seed"],
        holdout_loss=doc["holdout_loss"],
    )


def arx_to_json(model: ArxModel) -> str:
    doc = {
        "schema": "windcurve-arx-v1",
        "lags": list(model.config.lags),
        "ridge": model.config.ridge,
        "use_explanatory": model.config.use_explanatory,
        "night_window": list(model.config.night_window),
        "coef": model.coef.tolist(),
        "intercept": model.intercept,
        "feat_mean": model.feat_mean.tolist(),
        "feat_std": model.feat_std.tolist(),
        "feature_names": model.feature_names,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def arx_from_json(text: str) -> ArxModel:
    doc = json.loads(text)
    if doc.get("schema") != "windcurve-arx-v1":
        raise ValueError(f"unexpected ARX schema {doc.get('schema')!r}")
    return ArxModel(
        config=ArxConfig(
            lags=tuple(doc["lags"]),
            ridge=doc["ridge"],
            use_explanatory=doc["use_explanatory"],
            night_window=tuple(doc["night_window"]),
        ),
        coef=np.asarray(doc["coef"]),
        intercept=doc["intercept"],
        feat_mean=np.asarray(doc["feat_mean"]),
        feat_std=np.asarray(doc["feat_std"]),
        feature_names=list(doc["feature_names"]),
    )
