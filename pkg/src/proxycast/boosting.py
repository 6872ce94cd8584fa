"""Regularized gradient-boosted regression trees with lagged-feature supervision.

Squared-error objective: per round the gradients are the residuals and the
hessians are 1. Leaf weights use the soft-thresholded closed form
w = -T_alpha(G) / (H + lambda); split gain is
0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) - gamma, and
non-positive-gain splits are pruned. Each split learns a default direction
for missing feature values (the gain-maximizing side). Exact greedy split
finding, vectorized per node and feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import DataError, NumericError
from .series import NormalizationParams, TimeSeries

_DOW_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


@dataclass(frozen=True)
class FeatureSpec:
    """Which history enters each supervised row."""

    lags: tuple[int, ...] = tuple(range(1, 15))
    windows: tuple[int, ...] = (7,)
    day_of_week: bool = True

    def __post_init__(self):
        lags = tuple(int(v) for v in self.lags)
        if not lags:
            raise DataError("feature spec needs at least one lag")
        if list(lags) != sorted(set(lags)) or lags[0] < 1:
            raise DataError("lags must be positive, sorted, and distinct")
        object.__setattr__(self, "lags", lags)
        windows = tuple(int(v) for v in self.windows)
        if any(w < 1 for w in windows):
            raise DataError("rolling windows must be positive")
        object.__setattr__(self, "windows", windows)

    @property
    def history_needed(self) -> int:
        return max(self.lags + self.windows)

    @property
    def column_names(self) -> list[str]:
        names = [f"lag_{l}" for l in self.lags]
        names += [f"rollmean_{w}" for w in self.windows]
        if self.day_of_week:
            names += [f"dow_{d}" for d in _DOW_NAMES]
        return names


@dataclass(frozen=True)
class SupervisedFrame:
    """Feature matrix, aligned targets, and their dates (strictly increasing)."""

    features: np.ndarray
    targets: np.ndarray
    dates: tuple[date, ...]
    columns: tuple[str, ...] = ()
    spec: FeatureSpec | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        targs = np.asarray(self.targets, dtype=float)
        if feats.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {feats.shape}")
        if len(targs) != len(feats) or len(self.dates) != len(feats):
            raise DataError("features, targets and dates must have equal row counts")
        if np.isnan(targs).any():
            raise DataError("targets contain missing values")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise DataError("frame dates must be strictly increasing")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "targets", targs)
        object.__setattr__(self, "dates", tuple(self.dates))
        if not self.columns:
            object.__setattr__(
                self, "columns", tuple(f"f{i}" for i in range(feats.shape[1]))
            )
        else:
            object.__setattr__(self, "columns", tuple(self.columns))

    def __len__(self) -> int:
        return len(self.targets)

    def slice(self, start: int, stop: int) -> "SupervisedFrame":
        return SupervisedFrame(
            self.features[start:stop],
            self.targets[start:stop],
            self.dates[start:stop],
            self.columns,
            self.spec,
        )


@dataclass(frozen=True)
class HyperParams:
    rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    l1_alpha: float = 0.0
    gamma: float = 0.0  # minimum split gain
    min_child_weight: float = 1.0

    def __post_init__(self):
        if self.rounds < 1:
            raise DataError("rounds must be >= 1")
        if self.max_depth < 0:
            raise DataError("max depth must be >= 0")
        if not 0 < self.learning_rate <= 1:
            raise DataError("learning rate must be in (0, 1]")
        if self.l2_lambda < 0 or self.l1_alpha < 0 or self.gamma < 0:
            raise DataError("regularization terms must be >= 0")
        if self.min_child_weight < 0:
            raise DataError("min child weight must be >= 0")


def _soft_threshold(g_sum: float, alpha: float) -> float:
    if alpha <= 0:
        return g_sum
    return math.copysign(max(abs(g_sum) - alpha, 0.0), g_sum)


class RegressionTree:
    """Binary tree stored as flat parallel arrays (index 0 is the root)."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.default_left: list[bool] = []
        self.weight: list[float] = []
        self.is_leaf: list[bool] = []

    def _add_leaf(self, weight: float) -> int:
        idx = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.default_left.append(True)
        self.weight.append(weight)
        self.is_leaf.append(True)
        return idx

    def _add_split(self, feature: int, threshold: float, default_left: bool) -> int:
        idx = len(self.feature)
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.default_left.append(default_left)
        self.weight.append(0.0)
        self.is_leaf.append(False)
        return idx

    def _freeze(self):
        self.feature = np.asarray(self.feature, dtype=np.intp)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.left = np.asarray(self.left, dtype=np.intp)
        self.right = np.asarray(self.right, dtype=np.intp)
        self.default_left = np.asarray(self.default_left, dtype=bool)
        self.weight = np.asarray(self.weight, dtype=float)
        self.is_leaf = np.asarray(self.is_leaf, dtype=bool)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaf_indices(self, x: np.ndarray) -> np.ndarray:
        """Route every row to its leaf; missing values follow the stored default."""
        node = np.zeros(len(x), dtype=np.intp)
        while True:
            active = ~self.is_leaf[node]
            if not active.any():
                return node
            rows = np.nonzero(active)[0]
            nd = node[rows]
            v = x[rows, self.feature[nd]]
            go_left = v < self.threshold[nd]
            missing = np.isnan(v)
            if missing.any():
                go_left = np.where(missing, self.default_left[nd], go_left)
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.weight[self.leaf_indices(x)]

    def to_dict(self) -> dict:
        return {
            "feature": [int(v) for v in self.feature],
            "threshold": [float(v) for v in self.threshold],
            "left": [int(v) for v in self.left],
            "right": [int(v) for v in self.right],
            "default_left": [bool(v) for v in self.default_left],
            "weight": [float(v) for v in self.weight],
            "is_leaf": [bool(v) for v in self.is_leaf],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        tree = cls()
        tree.feature = list(d["feature"])
        tree.threshold = list(d["threshold"])
        tree.left = list(d["left"])
        tree.right = list(d["right"])
        tree.default_left = list(d["default_left"])
        tree.weight = list(d["weight"])
        tree.is_leaf = list(d["is_leaf"])
        tree._freeze()
        return tree


@dataclass
class BoostedEnsemble:
    base_score: float
    trees: list[RegressionTree]
    learning_rate: float
    n_features: int
    feature_names: tuple[str, ...] = ()
    feature_spec: FeatureSpec | None = None
    normalization: NormalizationParams | None = None
    train_predictions: np.ndarray | None = None


class _TreeBuilder:
    """Exact greedy builder for one tree on fixed gradients/hessians."""

    def __init__(self, x: np.ndarray, g: np.ndarray, h: np.ndarray, hp: HyperParams):
        self.x, self.g, self.h, self.hp = x, g, h, hp
        self.any_nan = bool(np.isnan(x).any())
        self.tree = RegressionTree()

    def build(self) -> RegressionTree:
        rows = np.arange(len(self.x), dtype=np.intp)
        self._grow(rows, depth=0)
        self.tree._freeze()
        return self.tree

    def _leaf_weight(self, g_sum: float, h_sum: float) -> float:
        return -_soft_threshold(g_sum, self.hp.l1_alpha) / (h_sum + self.hp.l2_lambda)

    def _grow(self, rows: np.ndarray, depth: int) -> int:
        sub_g = self.g[rows]
        g_sum = float(sub_g.sum())
        h_sum = float(self.h[rows].sum())
        if depth >= self.hp.max_depth or len(rows) < 2:
            return self.tree._add_leaf(self._leaf_weight(g_sum, h_sum))
        sub_x = self.x[rows]
        split = self._find_split(sub_x, sub_g, self.h[rows], g_sum, h_sum)
        if split is None:
            return self.tree._add_leaf(self._leaf_weight(g_sum, h_sum))
        feature, threshold, default_left = split
        v = sub_x[:, feature]
        go_left = v < threshold
        if self.any_nan:
            missing = np.isnan(v)
            if missing.any():
                go_left = np.where(missing, default_left, go_left)
        node = self.tree._add_split(feature, threshold, default_left)
        self.tree.left[node] = self._grow(rows[go_left], depth + 1)
        self.tree.right[node] = self._grow(rows[~go_left], depth + 1)
        return node

    def _find_split(self, sub_x: np.ndarray, sub_g: np.ndarray, sub_h: np.ndarray,
                    g_sum: float, h_sum: float):
        hp = self.hp
        lam = hp.l2_lambda
        parent_term = g_sum * g_sum / (h_sum + lam)
        best_gain = 0.0  # non-positive gain is pruned
        best = None
        for feature in range(sub_x.shape[1]):
            v = sub_x[:, feature]
            g_miss = h_miss = 0.0
            has_missing = False
            if self.any_nan:
                missing = np.isnan(v)
                has_missing = bool(missing.any())
            if has_missing:
                present = ~missing
                vp = v[present]
                if vp.size == 0:
                    continue
                gp = sub_g[present]
                hp_arr = sub_h[present]
                g_miss = float(sub_g[missing].sum())
                h_miss = float(sub_h[missing].sum())
            else:
                vp, gp, hp_arr = v, sub_g, sub_h
            order = vp.argsort(kind="stable")
            vs = vp[order]
            if vs[0] == vs[-1]:
                continue
            boundary = vs[1:] != vs[:-1]
            gl = np.cumsum(gp[order])[:-1][boundary]
            hl = np.cumsum(hp_arr[order])[:-1][boundary]
            thresholds = 0.5 * (vs[:-1][boundary] + vs[1:][boundary])
            # with no missing rows both default directions score identically
            for default_left in (True, False) if has_missing else (True,):
                gl_eff = gl + g_miss if default_left else gl
                hl_eff = hl + h_miss if default_left else hl
                gr_eff = g_sum - gl_eff
                hr_eff = h_sum - hl_eff
                gains = (
                    0.5
                    * (
                        gl_eff**2 / (hl_eff + lam)
                        + gr_eff**2 / (hr_eff + lam)
                        - parent_term
                    )
                    - hp.gamma
                )
                invalid = (hl_eff < hp.min_child_weight) | (hr_eff < hp.min_child_weight)
                if invalid.any():
                    gains[invalid] = -np.inf
                i = int(gains.argmax())  # first max -> lowest threshold
                if gains[i] > best_gain:
                    best_gain = float(gains[i])
                    best = (feature, float(thresholds[i]), default_left)
        return best


def _rmse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((a - b) ** 2)))


def fit_boosted_ensemble(
    train: SupervisedFrame,
    hp: HyperParams,
    seed: int = 0,
    normalization: NormalizationParams | None = None,
) -> BoostedEnsemble:
    """Fit `hp.rounds` trees on residual gradients (squared loss, hessian 1).

    Deterministic: the seed is accepted for forward compatibility but no
    stochastic option is currently enabled. Training RMSE is asserted
    non-increasing per round when gamma is 0, and every leaf weight is
    re-checked against its closed form after fitting.
    """
    del seed  # reserved for stochastic options (column subsampling etc.)
    x, y = train.features, train.targets
    if len(y) == 0:
        raise DataError("training frame is empty")
    if not np.isfinite(y).all() or not np.isfinite(x[~np.isnan(x)]).all():
        raise DataError("training frame contains non-finite values")

    base = float(y.mean())
    preds = np.full(len(y), base)
    ones = np.ones(len(y))
    trees: list[RegressionTree] = []
    prev_rmse = _rmse(preds, y)
    for round_idx in range(hp.rounds):
        g = preds - y
        tree = _TreeBuilder(x, g, ones, hp).build()
        trees.append(tree)
        preds = preds + hp.learning_rate * tree.predict(x)
        if not np.isfinite(preds).all():
            raise NumericError(f"non-finite training loss at round {round_idx + 1}")
        cur_rmse = _rmse(preds, y)
        if hp.gamma == 0:
            assert cur_rmse <= prev_rmse + 1e-9, (
                f"training rmse increased at round {round_idx + 1}: "
                f"{prev_rmse} -> {cur_rmse}"
            )
        prev_rmse = cur_rmse

    model = BoostedEnsemble(
        base_score=base,
        trees=trees,
        learning_rate=hp.learning_rate,
        n_features=x.shape[1],
        feature_names=train.columns,
        feature_spec=train.spec,
        normalization=normalization,
        train_predictions=preds,
    )
    _verify_leaf_weights(model, train, hp)
    return model


def _verify_leaf_weights(model: BoostedEnsemble, train: SupervisedFrame, hp: HyperParams):
    """Replay training and check every leaf weight against -T_alpha(G)/(H + lambda)."""
    x, y = train.features, train.targets
    preds = np.full(len(y), model.base_score)
    for tree in model.trees:
        g = preds - y
        leaves = tree.leaf_indices(x)
        g_sums = np.bincount(leaves, weights=g, minlength=tree.n_nodes)
        counts = np.bincount(leaves, minlength=tree.n_nodes)
        for node in np.nonzero(counts)[0]:
            expected = -_soft_threshold(float(g_sums[node]), hp.l1_alpha) / (
                counts[node] + hp.l2_lambda
            )
            assert abs(tree.weight[node] - expected) <= 1e-8 + 1e-8 * abs(expected), (
                f"leaf weight {tree.weight[node]} deviates from closed form {expected}"
            )
        preds = preds + model.learning_rate * tree.predict(x)


def predict(model: BoostedEnsemble, rows: np.ndarray) -> np.ndarray:
    """base + learning_rate * sum of tree outputs, per row."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.shape[1] != model.n_features:
        raise DataError(
            f"feature width {rows.shape[1]} does not match training width {model.n_features}"
        )
    out = np.full(len(rows), model.base_score)
    for tree in model.trees:
        out = out + model.learning_rate * tree.predict(rows)
    return out


@dataclass(frozen=True)
class Metrics:
    rmse: float
    mae: float
    r2: float | None  # None when the actuals have zero variance


def compute_metrics(actual, predicted) -> Metrics:
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if len(a) == 0 or len(a) != len(p):
        raise DataError(f"need equal non-zero lengths, got {len(a)} vs {len(p)}")
    err = a - p
    rmse = float(np.sqrt(np.mean(err**2)))
    mae = float(np.mean(np.abs(err)))
    assert rmse + 1e-12 >= mae, "rmse < mae violates the power-mean inequality"
    sst = float(np.sum((a - a.mean()) ** 2))
    if sst == 0.0:
        return Metrics(rmse, mae, None)
    r2 = 1.0 - float(np.sum(err**2)) / sst
    return Metrics(rmse, mae, r2)


def build_features(series: TimeSeries, spec: FeatureSpec) -> SupervisedFrame:
    """Lay out lagged values, trailing rolling means, and day-of-week flags.

    Row t predicts x_t from {x_(t-l)}, rolling means ending at t-1, and the
    one-hot weekday of date t. Rows with incomplete history are dropped.
    """
    if series.has_missing:
        raise DataError(f"series {series.id!r} has missing values; impute first")
    values = series.values
    n = len(values)
    max_lag = max(spec.lags)
    max_window = max(spec.windows) if spec.windows else 0
    if n <= max_lag + max_window:
        raise DataError(
            f"series {series.id!r} too short: {n} observations, "
            f"need at least {max_lag + max_window + 1}"
        )
    start = spec.history_needed
    rows = []
    for t in range(start, n):
        rows.append(_feature_row(values[:t], series.dates[t], spec))
    return SupervisedFrame(
        np.asarray(rows),
        values[start:],
        series.dates[start:],
        tuple(spec.column_names),
        spec,
    )


def _feature_row(history: np.ndarray, when: date, spec: FeatureSpec) -> list[float]:
    """Features for predicting the observation at `when`, given all prior values."""
    row = [float(history[-l]) for l in spec.lags]
    for w in spec.windows:
        row.append(float(np.mean(history[-w:])))
    if spec.day_of_week:
        dow = when.weekday()
        row.extend(1.0 if d == dow else 0.0 for d in range(7))
    return row


def chrono_split(frame: SupervisedFrame, train_fraction: float = 0.8):
    """Earliest ceil(fraction * n) rows train, remainder test; no shuffling."""
    if not 0 < train_fraction < 1:
        raise DataError(f"train fraction must be in (0, 1), got {train_fraction}")
    n = len(frame)
    if n < 2:
        raise DataError("frame needs at least 2 rows to split")
    n_train = math.ceil(train_fraction * n)
    if n_train == 0 or n_train == n:
        raise DataError(f"fraction {train_fraction} yields an empty split side for n={n}")
    train, test = frame.slice(0, n_train), frame.slice(n_train, n)
    assert max(train.dates) < min(test.dates), "chronological split leaked future rows"
    return train, test


def default_grid() -> list[HyperParams]:
    grid = []
    for rounds in (100, 300):
        for depth in (3, 5):
            for lr in (0.05, 0.1):
                grid.append(
                    HyperParams(rounds=rounds, max_depth=depth, learning_rate=lr)
                )
    return grid


def grid_search(
    frame: SupervisedFrame,
    grid: list[HyperParams],
    folds: int = 3,
    seed: int = 0,
) -> tuple[HyperParams, list[tuple[HyperParams, float]]]:
    """Rolling-origin (expanding-window) CV over the grid.

    Fold f trains on the first rows and validates on the next block; the best
    config minimizes mean validation RMSE, with ties broken by fewer rounds,
    then smaller depth, then first occurrence.
    """
    if not grid:
        raise DataError("hyperparameter grid is empty")
    if folds < 2:
        raise DataError("rolling-origin CV needs folds >= 2")
    n = len(frame)
    block = n // (folds + 1)
    if block < 1:
        raise DataError(f"frame with {n} rows is too small for {folds} folds")
    scores: list[tuple[HyperParams, float]] = []
    best_hp = None
    best_key = None
    for hp in grid:
        fold_rmse = []
        for f in range(folds):
            val_start = n - (folds - f) * block
            train = frame.slice(0, val_start)
            val = frame.slice(val_start, val_start + block)
            model = fit_boosted_ensemble(train, hp, seed)
            fold_rmse.append(_rmse(predict(model, val.features), val.targets))
        mean_rmse = float(np.mean(fold_rmse))
        scores.append((hp, mean_rmse))
        key = (mean_rmse, hp.rounds, hp.max_depth)
        if best_key is None or key < best_key:
            best_key = key
            best_hp = hp
    return best_hp, scores


def recursive_forecast(model: BoostedEnsemble, history: TimeSeries, horizon: int) -> np.ndarray:
    """Forecast `horizon` daily steps, feeding each prediction back as history."""
    if horizon < 1:
        raise DataError("horizon must be >= 1")
    if model.feature_spec is None:
        raise DataError("model carries no feature spec; cannot build forecast features")
    if history.has_missing:
        raise DataError("history has missing values; impute first")
    spec = model.feature_spec
    if len(history.values) < spec.history_needed:
        raise DataError(
            f"history of {len(history.values)} observations is too short; "
            f"feature spec needs {spec.history_needed}"
        )
    values = list(history.values)
    last_date = history.dates[-1]
    out = np.empty(horizon)
    for h in range(1, horizon + 1):
        when = last_date + timedelta(days=h)
        row = _feature_row(np.asarray(values), when, spec)
        yhat = float(predict(model, np.asarray([row]))[0])
        out[h - 1] = yhat
        values.append(yhat)
    return out


def ensemble_to_dict(model: BoostedEnsemble) -> dict:
    spec = model.feature_spec
    return {
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "n_features": model.n_features,
        "feature_names": list(model.feature_names),
        "feature_spec": None
        if spec is None
        else {
            "lags": list(spec.lags),
            "windows": list(spec.windows),
            "day_of_week": spec.day_of_week,
        },
        "normalization": None
        if model.normalization is None
        else {"mean": model.normalization.mean, "std": model.normalization.std},
        "trees": [t.to_dict() for t in model.trees],
    }


def ensemble_from_dict(d: dict) -> BoostedEnsemble:
    spec = d.get("feature_spec")
    norm = d.get("normalization")
    return BoostedEnsemble(
        base_score=float(d["base_score"]),
        trees=[RegressionTree.from_dict(td) for td in d["trees"]],
        learning_rate=float(d["learning_rate"]),
        n_features=int(d["n_features"]),
        feature_names=tuple(d.get("feature_names", ())),
        feature_spec=None
        if spec is None
        else FeatureSpec(tuple(spec["lags"]), tuple(spec["windows"]), spec["day_of_week"]),
        normalization=None if norm is None else NormalizationParams(norm["mean"], norm["std"]),
    )
