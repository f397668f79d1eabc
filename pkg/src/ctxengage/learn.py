"""Classifiers, hyperparameter grids, 4-fold grid search and model persistence."""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .eval_metrics import EvalRow, prauc, rce
from .synthgen import stream

log = logging.getLogger(__name__)

KINDS = ("bayes", "lr", "tree", "forest", "GradientBoosting", "svc")
LR_RATE = 0.1
GBT_ITERATIONS = 20
GBT_DEPTH = 5
SVC_ITERATIONS = 100

GRIDS: dict[str, dict[str, list]] = {
    "bayes": {"smoothing": [0.0, 0.5, 1.0]},
    "lr": {"elasticNetParam": [0.0, 0.5, 1.0], "regParam": [0.0, 0.5, 1.0],
           "fitIntercept": [True, False], "maxIter": [10, 50, 100]},
    "tree": {"impurity": ["gini", "entropy"], "maxDepth": [5, 15, 30]},
    "forest": {"impurity": ["gini", "entropy"], "numTrees": [10, 50, 100],
               "featureSubsetStrategy": ["log2", "sqrt", "all"]},
    "GradientBoosting": {"minInstancesPerNode": [1, 5, 10], "subsamplingRate": [0.1, 0.5, 1.0],
                         "minInfoGain": [0.1, 0.5, 1.0], "stepSize": [0.1, 0.5, 1.0]},
    "svc": {"regParam": [0.0, 0.5, 1.0], "threshold": [0.0, 0.5, 1.0],
            "standardization": [True, False], "fitIntercept": [True, False]},
}


def grid_cells(grid: Mapping[str, Sequence]) -> list[dict]:
    """Cartesian product in the grid's key order, last key varying fastest."""
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_xy(X, y=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-d")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix must be finite")
    if y is None:
        return X
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValueError("labels must match the number of rows")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return X, y


# --------------------------------------------------------------------------
# naive Bayes

def train_nb(X, y, smoothing: float = 1.0) -> dict:
    X, y = _check_xy(X, y)
    if not 0.0 <= smoothing <= 1.0:
        raise ValueError("smoothing must lie in [0, 1]")
    if np.any(X < 0):
        raise ValueError("multinomial naive Bayes needs non-negative features")
    log_prior, log_theta = [], []
    d = X.shape[1]
    for c in (0, 1):
        rows = X[y == c]
        if len(rows) == 0:
            raise ValueError(f"class {c} has no rows")
        log_prior.append(math.log(len(rows) / len(X)))
        totals = rows.sum(axis=0) + smoothing
        denom = totals.sum() if d else 1.0
        with np.errstate(divide="ignore"):
            log_theta.append(np.log(totals / denom) if denom > 0 else np.full(d, -np.inf))
    return {"log_prior": np.array(log_prior), "log_theta": np.vstack(log_theta) if d else
            np.zeros((2, 0))}


def nb_class_probabilities(state: Mapping, X) -> np.ndarray:
    X = _check_xy(X)
    theta = np.asarray(state["log_theta"], dtype=np.float64)
    with np.errstate(invalid="ignore"):
        terms = np.where(X[:, None, :] > 0, X[:, None, :] * theta[None, :, :], 0.0)
    scores = np.asarray(state["log_prior"])[None, :] + terms.sum(axis=2)
    top = scores.max(axis=1, keepdims=True)
    stuck = ~np.isfinite(top[:, 0])
    top[stuck] = 0.0
    expd = np.exp(scores - top)
    expd[stuck] = np.exp(np.asarray(state["log_prior"]))
    return expd / expd.sum(axis=1, keepdims=True)


# --------------------------------------------------------------------------
# logistic regression

def logistic_loss_and_gradient(w, b, X, y) -> tuple[float, np.ndarray, float]:
    """Mean logistic loss (no penalty) with its gradient in w and in the intercept."""
    z = X @ w + b
    p = sigmoid(z)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    residual = (p - y) / len(y)
    return loss, X.T @ residual, float(residual.sum())


def train_lr(X, y, elasticNetParam: float = 0.0, regParam: float = 0.0,
             fitIntercept: bool = True, maxIter: int = 100) -> dict:
    """Full-batch gradient descent from zero; the penalty is applied as a proximal step."""
    X, y = _check_xy(X, y)
    w = np.zeros(X.shape[1])
    b = 0.0
    l1 = LR_RATE * regParam * elasticNetParam
    l2 = LR_RATE * regParam * (1.0 - elasticNetParam)
    for _ in range(int(maxIter)):
        loss, grad_w, grad_b = logistic_loss_and_gradient(w, b, X, y)
        if not math.isfinite(loss):
            raise FloatingPointError("logistic loss became non-finite")
        w = w - LR_RATE * grad_w
        w = np.sign(w) * np.maximum(np.abs(w) - l1, 0.0) / (1.0 + l2)
        if fitIntercept:
            b -= LR_RATE * grad_b
    return {"weights": w, "intercept": b}


# --------------------------------------------------------------------------
# trees

@dataclass
class BinnedMatrix:
    """Per-feature sorted distinct values with row codes laid out in one flat index."""

    codes: np.ndarray        # rows x features, already offset per feature
    offsets: np.ndarray      # features + 1
    thresholds: np.ndarray   # value of each flat position
    feature_of: np.ndarray   # feature of each flat position

    @classmethod
    def from_matrix(cls, X: np.ndarray) -> "BinnedMatrix":
        n, d = X.shape
        codes = np.empty((n, d), dtype=np.int64)
        values, offsets = [], [0]
        for j in range(d):
            uniq, inv = np.unique(X[:, j], return_inverse=True)
            codes[:, j] = inv + offsets[-1]
            values.append(uniq)
            offsets.append(offsets[-1] + len(uniq))
        thresholds = np.concatenate(values) if values else np.zeros(0)
        feature_of = np.repeat(np.arange(d), np.diff(offsets))
        return cls(codes, np.asarray(offsets), thresholds, feature_of)


def _impurity(kind: str, count, total, total_sq):
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), 0.0)
        if kind == "variance":
            return np.maximum(np.where(count > 0, total_sq / np.maximum(count, 1), 0.0) - mean ** 2, 0.0)
        p = np.clip(mean, 0.0, 1.0)
        if kind == "gini":
            return 2.0 * p * (1.0 - p)
        if kind == "entropy":
            q = 1.0 - p
            return -(np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
                     + np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0))
    raise ValueError(f"unknown impurity {kind!r}")


@dataclass
class Tree:
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)
    depth: int = 0

    def _add(self) -> int:
        for column in (self.feature, self.left, self.right):
            column.append(-1)
        self.threshold.append(0.0)
        self.value.append(0.0)
        return len(self.feature) - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature, dtype=np.int64)
        threshold = np.asarray(self.threshold, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        node = np.zeros(len(X), dtype=np.int64)
        for _ in range(self.depth):
            f = feature[node]
            inner = np.flatnonzero(f >= 0)
            if len(inner) == 0:
                break
            at = node[inner]
            go_left = X[inner, f[inner]] <= threshold[at]
            node[inner] = np.where(go_left, left[at], right[at])
        return np.asarray(self.value, dtype=np.float64)[node]

    def to_dict(self) -> dict:
        return {"feature": self.feature, "threshold": self.threshold, "left": self.left,
                "right": self.right, "value": self.value, "depth": self.depth}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Tree":
        return cls([int(v) for v in data["feature"]], [float(v) for v in data["threshold"]],
                   [int(v) for v in data["left"]], [int(v) for v in data["right"]],
                   [float(v) for v in data["value"]], int(data["depth"]))


def grow_tree(binned: BinnedMatrix, rows: np.ndarray, target: np.ndarray, impurity: str,
              max_depth: int, leaf_value: Callable[[np.ndarray], float],
              min_instances: int = 1, min_gain: float = 0.0,
              rng: np.random.Generator | None = None, n_candidates: int | None = None) -> Tree:
    """Greedy binary splits 'feature <= value' maximising the impurity decrease.

    Ties go to the lowest feature index, then the smallest value.  Splits with a
    gain of exactly ``min_gain`` are accepted.
    """
    n_features = binned.codes.shape[1]
    total_bins = len(binned.thresholds)
    seg_start = binned.offsets[:-1]
    tree = Tree()
    root = tree._add()
    stack = [(root, np.asarray(rows, dtype=np.int64), 0)]
    while stack:
        node, idx, depth = stack.pop()
        tree.depth = max(tree.depth, depth)
        y = target[idx]
        n = len(idx)
        tree.value[node] = leaf_value(idx)
        s, ss = float(y.sum()), float((y * y).sum())
        parent = float(_impurity(impurity, np.float64(n), s, ss))
        if depth >= max_depth or n < 2 * max(1, min_instances) or parent <= 1e-15 or n_features == 0:
            continue
        flat = binned.codes[idx].ravel()
        count = np.bincount(flat, minlength=total_bins).astype(np.float64)
        total = np.bincount(flat, weights=np.repeat(y, n_features), minlength=total_bins)
        total_sq = np.bincount(flat, weights=np.repeat(y * y, n_features), minlength=total_bins)
        cum = [np.cumsum(a) for a in (count, total, total_sq)]
        base = [np.repeat(np.r_[0.0, c[seg_start[1:] - 1]], np.diff(binned.offsets)) for c in cum]
        lc, ls, lss = (c - b for c, b in zip(cum, base))
        rc, rs, rss = n - lc, s - ls, ss - lss
        gain = parent - (lc / n) * _impurity(impurity, lc, ls, lss) \
            - (rc / n) * _impurity(impurity, rc, rs, rss)
        valid = (lc >= max(1, min_instances)) & (rc >= max(1, min_instances))
        if n_candidates is not None and n_candidates < n_features:
            chosen = np.zeros(n_features, dtype=bool)
            chosen[rng.choice(n_features, size=n_candidates, replace=False)] = True
            valid &= chosen[binned.feature_of]
        if not valid.any():
            continue
        score = np.where(valid, np.round(gain, 12), -np.inf)
        best = int(np.argmax(score))
        if score[best] < min_gain - 1e-12:
            continue
        feature = int(binned.feature_of[best])
        go_left = binned.codes[idx, feature] <= best
        left, right = tree._add(), tree._add()
        tree.feature[node], tree.threshold[node] = feature, float(binned.thresholds[best])
        tree.left[node], tree.right[node] = left, right
        stack.append((right, idx[~go_left], depth + 1))
        stack.append((left, idx[go_left], depth + 1))
    return tree


def train_tree(X, y, impurity: str = "gini", maxDepth: int = 5, minInstancesPerNode: int = 1,
               minInfoGain: float = 0.0) -> dict:
    X, y = _check_xy(X, y)
    if len(y) == 0:
        raise ValueError("cannot grow a tree on zero rows")
    binned = BinnedMatrix.from_matrix(X)
    tree = grow_tree(binned, np.arange(len(y)), y, impurity, int(maxDepth),
                     lambda idx: float(y[idx].mean()), int(minInstancesPerNode), float(minInfoGain))
    return {"tree": tree}


def candidate_count(strategy: str, n_features: int) -> int:
    if strategy == "all":
        return n_features
    if strategy == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    if strategy == "log2":
        return max(1, math.ceil(math.log2(n_features))) if n_features > 1 else 1
    raise ValueError(f"unknown feature subset strategy {strategy!r}")


def train_forest(X, y, impurity: str = "gini", numTrees: int = 10,
                 featureSubsetStrategy: str = "sqrt", maxDepth: int = 5, seed: int = 0,
                 bootstrap: bool = True) -> dict:
    X, y = _check_xy(X, y)
    if numTrees < 1:
        raise ValueError("a forest needs at least one tree")
    binned = BinnedMatrix.from_matrix(X)
    k = candidate_count(featureSubsetStrategy, X.shape[1])
    trees = []
    for t in range(int(numTrees)):
        rng = stream(seed, f"forest:{t}")
        rows = rng.integers(0, len(y), len(y)) if bootstrap else np.arange(len(y))
        trees.append(grow_tree(binned, rows, y, impurity, maxDepth,
                               lambda idx: float(y[idx].mean()), rng=rng, n_candidates=k))
    return {"trees": trees}


def train_gbt(X, y, minInstancesPerNode: int = 1, subsamplingRate: float = 1.0,
              minInfoGain: float = 0.0, stepSize: float = 0.1, numIter: int = GBT_ITERATIONS,
              treeDepth: int = GBT_DEPTH, seed: int = 0) -> dict:
    X, y = _check_xy(X, y)
    rate = y.mean() if len(y) else 0.0
    if rate in (0.0, 1.0):
        raise ValueError("gradient boosting needs both classes")
    base = math.log(rate / (1.0 - rate))
    binned = BinnedMatrix.from_matrix(X)
    score = np.full(len(y), base)
    trees = []
    for it in range(int(numIter)):
        rng = stream(seed, f"gbt:{it}")
        rows = np.flatnonzero(rng.random(len(y)) < subsamplingRate) if subsamplingRate < 1 \
            else np.arange(len(y))
        if len(rows) == 0:
            rows = np.array([int(rng.integers(len(y)))])
        p = sigmoid(score)
        residual = y - p
        hessian = p * (1.0 - p)

        def newton(idx, residual=residual, hessian=hessian):
            h = hessian[idx].sum()
            return float(residual[idx].sum() / h) if h > 1e-12 else 0.0

        tree = grow_tree(binned, rows, residual, "variance", treeDepth, newton,
                         int(minInstancesPerNode), float(minInfoGain))
        trees.append(tree)
        score = score + stepSize * tree.predict(X)
    return {"base": base, "stepSize": float(stepSize), "trees": trees}


def gbt_scores(state: Mapping, X: np.ndarray, iterations: int | None = None) -> np.ndarray:
    trees = state["trees"] if iterations is None else state["trees"][:iterations]
    score = np.full(len(X), float(state["base"]))
    for tree in trees:
        score += state["stepSize"] * tree.predict(X)
    return score


# --------------------------------------------------------------------------
# linear support vector classifier

def train_svc(X, y, regParam: float = 0.0, threshold: float = 0.0, standardization: bool = True,
              fitIntercept: bool = True, numIter: int = SVC_ITERATIONS) -> dict:
    X, y = _check_xy(X, y)
    if standardization:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        mean, scale = np.zeros(X.shape[1]), np.ones(X.shape[1])
    Z = (X - mean) / scale
    signs = 2.0 * y - 1.0
    w = np.zeros(X.shape[1])
    b = 0.0
    for t in range(int(numIter)):
        margin = signs * (Z @ w + b)
        active = margin < 1.0
        grad_w = regParam * w - (signs[active, None] * Z[active]).sum(axis=0) / len(y)
        grad_b = -signs[active].sum() / len(y)
        step = 0.1 / (1.0 + 0.01 * t)
        w = w - step * grad_w
        if fitIntercept:
            b -= step * grad_b
    return {"weights": w, "intercept": b, "mean": mean, "scale": scale, "threshold": float(threshold)}


def svc_margin(state: Mapping, X: np.ndarray) -> np.ndarray:
    Z = (X - np.asarray(state["mean"])) / np.asarray(state["scale"])
    return Z @ np.asarray(state["weights"]) + float(state["intercept"])


# --------------------------------------------------------------------------
# model wrapper

_TRAINERS = {"bayes": train_nb, "lr": train_lr, "tree": train_tree, "forest": train_forest,
             "GradientBoosting": train_gbt, "svc": train_svc}
_SEEDED = {"forest", "GradientBoosting"}


@dataclass
class ClassifierModel:
    kind: str
    params: dict
    state: dict
    feature_names: list[str] = field(default_factory=list)
    vector_name: str = ""
    target: str = ""
    trained_on: str = ""
    seed: int = 0

    def predict_proba(self, X) -> np.ndarray:
        """Probability of the positive class."""
        X = _check_xy(X)
        if self.kind == "bayes":
            out = nb_class_probabilities(self.state, X)[:, 1]
        elif self.kind == "lr":
            out = sigmoid(X @ np.asarray(self.state["weights"]) + self.state["intercept"])
        elif self.kind == "tree":
            out = self.state["tree"].predict(X)
        elif self.kind == "forest":
            out = np.mean([t.predict(X) for t in self.state["trees"]], axis=0)
        elif self.kind == "GradientBoosting":
            out = sigmoid(gbt_scores(self.state, X))
        elif self.kind == "svc":
            out = sigmoid(svc_margin(self.state, X))
        else:
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        return np.clip(out, 0.0, 1.0)

    def predict(self, X) -> np.ndarray:
        if self.kind == "svc":
            return (svc_margin(self.state, _check_xy(X)) >= self.state["threshold"]).astype(np.int64)
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "params": self.params, "seed": self.seed,
                           "state": _encode_state(self.state), "feature_names": self.feature_names,
                           "vector_name": self.vector_name, "target": self.target,
                           "trained_on": self.trained_on}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ClassifierModel":
        data = json.loads(text)
        return cls(data["kind"], data["params"], _decode_state(data["state"]), data["feature_names"],
                   data["vector_name"], data["target"], data["trained_on"], data["seed"])


def _encode_state(state: Mapping) -> dict:
    out = {}
    for key, value in state.items():
        if isinstance(value, Tree):
            out[key] = {"tree": value.to_dict()}
        elif isinstance(value, list) and value and isinstance(value[0], Tree):
            out[key] = {"trees": [t.to_dict() for t in value]}
        elif isinstance(value, np.ndarray):
            out[key] = {"array": value.tolist(), "shape": list(value.shape)}
        else:
            out[key] = {"value": value}
    return out


def _decode_state(data: Mapping) -> dict:
    out = {}
    for key, value in data.items():
        if "tree" in value:
            out[key] = Tree.from_dict(value["tree"])
        elif "trees" in value:
            out[key] = [Tree.from_dict(t) for t in value["trees"]]
        elif "array" in value:
            out[key] = np.asarray(value["array"], dtype=np.float64).reshape(value["shape"])
        else:
            out[key] = value["value"]
    return out


def fit_model(kind: str, X, y, params: Mapping, seed: int = 0, **meta) -> ClassifierModel:
    if kind not in _TRAINERS:
        raise ValueError(f"unknown classifier kind {kind!r}")
    kwargs = dict(params)
    if kind in _SEEDED:
        kwargs["seed"] = seed
    state = _TRAINERS[kind](X, y, **kwargs)
    return ClassifierModel(kind, dict(params), state, seed=seed, **meta)


# --------------------------------------------------------------------------
# tuning

@dataclass
class CrossValidation:
    best_params: dict
    cell_scores: list[tuple[dict, float]]


def fold_assignment(n: int, folds: int, seed: int) -> list[np.ndarray]:
    order = stream(seed, "cv:shuffle").permutation(n)
    return np.array_split(order, folds)


def cross_validate(X, y, kind: str, grid: Mapping[str, Sequence] | Sequence[Mapping] | None = None,
                   folds: int = 4, seed: int = 0) -> CrossValidation:
    """Grid cell with the highest mean held-out RCE; ties go to the earliest cell."""
    X, y = _check_xy(X, y)
    if grid is None:
        grid = GRIDS[kind]
    cells = grid_cells(grid) if isinstance(grid, Mapping) else [dict(c) for c in grid]
    if not cells:
        raise ValueError("empty hyperparameter grid")
    parts = fold_assignment(len(y), folds, seed)
    scores: list[tuple[dict, float]] = []
    for ci, cell in enumerate(cells):
        values = []
        for fi, held in enumerate(parts):
            train_rows = np.concatenate([p for j, p in enumerate(parts) if j != fi])
            y_tr, y_te = y[train_rows], y[held]
            if len(np.unique(y_tr)) < 2 or len(np.unique(y_te)) < 2:
                log.info("%s cell %d fold %d has a single class; scored -inf", kind, ci, fi)
                values = [-math.inf]
                break
            model = fit_model(kind, X[train_rows], y_tr, cell, seed=seed)
            values.append(rce(y_te, model.predict_proba(X[held])))
        scores.append((cell, float(np.mean(values))))
    best = max(range(len(scores)), key=lambda i: (scores[i][1], -i))
    return CrossValidation(dict(scores[best][0]), scores)


# --------------------------------------------------------------------------
# naming, persistence and evaluation

def model_name(kind: str, selection: str, note: str, fit_on: str, based_on: str, target: str,
               tuned: bool = True) -> str:
    return ("classifier_model_of_type-" + kind + "-for_features-" + selection + f"-{note}-"
            + "-for_dataset-" + fit_on + "-based_on_dataset-" + based_on
            + "-predicting_target-" + target + ("-ht" if tuned else ""))


class ModelCollisionError(FileExistsError):
    pass


def save_model(model: ClassifierModel, name: str, directory: str | Path, extra: Mapping | None = None,
               overwrite: bool = False) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.model.json"
    if path.exists() and not overwrite:
        raise ModelCollisionError(f"model {name} already exists")
    meta = {"kind": model.kind, "params": model.params, "feature_names": model.feature_names,
            "vector_name": model.vector_name, "target": model.target,
            "trained_on": model.trained_on, "seed": model.seed, **(extra or {})}
    for target_path, payload in ((path, model.to_json()),
                                 (directory / f"{name}.meta.json",
                                  json.dumps(meta, sort_keys=True, indent=1))):
        tmp = target_path.with_name(target_path.name + ".tmp")
        tmp.write_text(payload)
        tmp.replace(target_path)
    return path


def load_model(name: str, directory: str | Path) -> ClassifierModel:
    return ClassifierModel.from_json((Path(directory) / f"{name}.model.json").read_text())


def model_exists(name: str, directory: str | Path) -> bool:
    return (Path(directory) / f"{name}.model.json").is_file()


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    selection: str
    note: str
    target: str
    vector_name: str
    fit_on: str
    based_on: str
    seed: int = 0

    @property
    def name(self) -> str:
        return model_name(self.kind, self.selection, self.note, self.fit_on, self.based_on, self.target)


def evaluate_model(model: ClassifierModel, spec: ModelSpec, frame, evaluated_on: str) -> list[EvalRow]:
    """PRAUC and RCE rows for one evaluation frame, or none when either is undefined."""
    labels = frame.labels[spec.target]
    if labels.min() == labels.max():
        log.info("skipping %s on %s: single-class labels", spec.name, evaluated_on)
        return []
    preds = model.predict_proba(frame.columns(model.feature_names))
    common = dict(target=spec.target, algorithm=spec.kind, note=spec.note,
                  feature_selection=spec.selection, trained_on=spec.fit_on, evaluated_on=evaluated_on)
    return [EvalRow(metric="PRAUC", value=prauc(labels, preds), **common),
            EvalRow(metric="RCE", value=rce(labels, preds), **common)]


def fit_predict_evaluate(spec: ModelSpec, fit_frame, params: Mapping, eval_frames: Mapping,
                         model_dir: str | Path, rewrite_existing: bool = False,
                         extra_meta: Mapping | None = None) -> tuple[ClassifierModel, list[EvalRow]]:
    """Fit (or reload) the model named by ``spec`` and evaluate it on every frame."""
    if model_exists(spec.name, model_dir) and not rewrite_existing:
        model = load_model(spec.name, model_dir)
        if model.params != dict(params) or model.vector_name != spec.vector_name:
            raise ModelCollisionError(
                f"{spec.name} exists with different settings; enable rewriting to replace it")
    else:
        names = fit_frame.vectors[spec.vector_name]
        model = fit_model(spec.kind, fit_frame.columns(names), fit_frame.labels[spec.target], params,
                          seed=spec.seed, feature_names=list(names), vector_name=spec.vector_name,
                          target=spec.target, trained_on=spec.fit_on)
        save_model(model, spec.name, model_dir, extra_meta, overwrite=True)
    rows: list[EvalRow] = []
    for evaluated_on, frame in eval_frames.items():
        rows.extend(evaluate_model(model, spec, frame, evaluated_on))
    return model, rows
