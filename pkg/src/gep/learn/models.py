"""Classifier roster: ZeroR, kNN, Gaussian naive Bayes, CART and tree ensembles.

Every model stores its classes in a fixed order (event labels by event
ordinal, anything else lexicographically). Vote ties go to the class that
comes first in that order.

Randomness comes from one integer seed. Each tree of an ensemble gets its
own Philox stream spawned from that seed, so the bootstrap and feature
draws for tree ``i`` do not depend on how the other trees were grown.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ConfigError, DataError
from ..tracking import EventType
from .dataset import MLDataset
from .tree import DecisionTree

KINDS = ("zero-r", "knn", "naive-bayes", "cart", "bagging-cart", "random-forest", "adaboost-stump")

DEFAULTS: dict[str, dict] = {
    "zero-r": {},
    "knn": {"k": 3},
    "naive-bayes": {"var_floor": 1e-9},
    "cart": {"max_depth": None, "min_split": 2},
    "bagging-cart": {"n_trees": 10, "max_depth": None, "min_split": 2},
    "random-forest": {"n_trees": 50, "max_features": "sqrt", "max_depth": None, "min_split": 2},
    "adaboost-stump": {"n_rounds": 10},
}

_EVENT_RANK = {e.value: e.ordinal for e in EventType}


def order_labels(labels) -> tuple[str, ...]:
    """Distinct labels in canonical order (event ordinal when all are events)."""
    uniq = set(labels)
    if uniq <= _EVENT_RANK.keys():
        return tuple(sorted(uniq, key=_EVENT_RANK.__getitem__))
    return tuple(sorted(uniq))


def resolve_params(kind: str, params: dict | None = None) -> dict:
    if kind not in KINDS:
        raise ConfigError(f"unknown classifier kind {kind!r}; choose from {', '.join(KINDS)}")
    out = dict(DEFAULTS[kind])
    for key, val in (params or {}).items():
        if key not in out:
            raise ConfigError(f"{kind} has no hyperparameter {key!r}")
        out[key] = val
    for key in ("n_trees", "k", "n_rounds"):
        if key in out and (not isinstance(out[key], int) or out[key] < 1):
            raise ConfigError(f"{key} must be an integer >= 1, got {out[key]!r}")
    if out.get("max_depth") is not None and (not isinstance(out["max_depth"], int) or out["max_depth"] < 1):
        raise ConfigError(f"max_depth must be None or >= 1, got {out['max_depth']!r}")
    if "min_split" in out and (not isinstance(out["min_split"], int) or out["min_split"] < 2):
        raise ConfigError(f"min_split must be >= 2, got {out['min_split']!r}")
    mf = out.get("max_features", "sqrt")
    if not (mf in ("sqrt", None) or (isinstance(mf, int) and mf >= 1)):
        raise ConfigError(f"max_features must be 'sqrt', None or a positive int, got {mf!r}")
    if "var_floor" in out and not out["var_floor"] > 0:
        raise ConfigError("var_floor must be positive")
    return out


def tree_streams(seed: int, n: int) -> list[np.random.Generator]:
    """One independent counter-based generator per tree."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass
class TrainedModel:
    kind: str
    params: dict
    classes: tuple[str, ...]
    columns: tuple[str, ...]
    seed: int
    state: dict = field(default_factory=dict, repr=False)

    @property
    def n_features(self) -> int:
        return len(self.columns)

    def to_dict(self) -> dict:
        state = {}
        for key, val in self.state.items():
            if key == "trees":
                state[key] = [t.to_dict() for t in val]
            elif isinstance(val, np.ndarray):
                state[key] = val.tolist()
            else:
                state[key] = val
        return {
            "kind": self.kind,
            "params": self.params,
            "classes": list(self.classes),
            "columns": list(self.columns),
            "seed": self.seed,
            "state": state,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        state = {}
        for key, val in d["state"].items():
            if key == "trees":
                state[key] = [DecisionTree.from_dict(t) for t in val]
            elif key == "alphas" or isinstance(val, list):
                state[key] = np.asarray(val, dtype=float)
            else:
                state[key] = val
        return cls(d["kind"], d["params"], tuple(d["classes"]), tuple(d["columns"]), int(d["seed"]), state)


@dataclass(frozen=True)
class Prediction:
    labels: np.ndarray  # object array of class names
    votes: np.ndarray  # rows x classes, each row sums to 1
    classes: tuple[str, ...]


def train(data: MLDataset, kind: str, params: dict | None = None, seed: int = 0) -> TrainedModel:
    params = resolve_params(kind, params)
    if len(data) == 0:
        raise DataError("cannot train on an empty dataset")
    classes = order_labels(data.y.tolist())
    if kind != "zero-r" and len(classes) < 2:
        raise DataError(f"{kind} needs at least 2 classes, got {list(classes)}")
    code = {c: i for i, c in enumerate(classes)}
    y = np.array([code[v] for v in data.y.tolist()], dtype=np.int64)
    X = data.X
    n, d = X.shape
    K = len(classes)
    state: dict = {}

    if kind == "zero-r":
        state["counts"] = np.bincount(y, minlength=K).astype(float)
    elif kind == "knn":
        lo, hi = X.min(axis=0), X.max(axis=0)
        state.update(X=X.copy(), y=y.astype(float), lo=lo, hi=hi)
    elif kind == "naive-bayes":
        means = np.zeros((K, d))
        var = np.zeros((K, d))
        for c in range(K):
            Xc = X[y == c]
            means[c] = Xc.mean(axis=0)
            var[c] = Xc.var(axis=0)
        state.update(prior=np.bincount(y, minlength=K) / n, mean=means, var=np.maximum(var, params["var_floor"]))
    elif kind == "cart":
        tree = DecisionTree(params["max_depth"], params["min_split"]).fit(X, y, K)
        state["trees"] = [tree]
    elif kind in ("bagging-cart", "random-forest"):
        if kind == "random-forest":
            mf = params["max_features"]
            mf = max(1, int(math.sqrt(d))) if mf == "sqrt" else d if mf is None else min(mf, d)
        else:
            mf = None
        trees = []
        for rng in tree_streams(seed, params["n_trees"]):
            rows = rng.integers(0, n, size=n)
            trees.append(DecisionTree(params["max_depth"], params["min_split"], mf).fit(X, y, K, rows=rows, rng=rng))
        state["trees"] = trees
    elif kind == "adaboost-stump":
        state.update(_samme(X, y, K, params["n_rounds"]))
    return TrainedModel(kind, params, classes, data.columns, seed, state)


def _samme(X: np.ndarray, y: np.ndarray, K: int, rounds: int) -> dict:
    n = len(y)
    w = np.full(n, 1.0 / n)
    trees, alphas = [], []
    for _ in range(rounds):
        stump = DecisionTree(max_depth=1).fit(X, y, K, weights=w)
        wrong = stump.predict(X) != y
        err = float(w[wrong].sum() / w.sum())
        if err >= 1.0 - 1.0 / K:
            if not trees:
                trees.append(stump)
                alphas.append(1.0)
            break
        if err <= 0.0:
            trees.append(stump)
            alphas.append(1.0 if not alphas else max(alphas) * 10)
            break
        alpha = math.log((1.0 - err) / err) + math.log(K - 1)
        trees.append(stump)
        alphas.append(alpha)
        w = w * np.exp(alpha * wrong)
        w /= w.sum()
    return {"trees": trees, "alphas": np.array(alphas)}


def _check_columns(model: TrainedModel, columns: Sequence[str] | None, width: int) -> None:
    if columns is not None and tuple(columns) != model.columns:
        raise DataError("feature columns differ from the ones the model was trained on")
    if width != model.n_features:
        raise DataError(f"expected {model.n_features} feature columns, got {width}")


def vote_matrix(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Per-class vote fractions for each row of ``X``."""
    K = len(model.classes)
    n = len(X)
    s = model.state
    if model.kind == "zero-r":
        out = np.zeros((n, K))
        out[:, int(np.argmax(s["counts"]))] = 1.0
        return out
    if model.kind == "knn":
        span = s["hi"] - s["lo"]
        span = np.where(span > 0, span, 1.0)
        A = (s["X"] - s["lo"]) / span
        B = (X - s["lo"]) / span
        d2 = (B * B).sum(1)[:, None] + (A * A).sum(1)[None, :] - 2.0 * B @ A.T
        k = min(model.params["k"], len(A))
        nearest = np.argsort(np.maximum(d2, 0.0), axis=1, kind="stable")[:, :k]
        labels = s["y"].astype(np.int64)[nearest]
        out = np.zeros((n, K))
        for c in range(K):
            out[:, c] = (labels == c).sum(axis=1)
        return out / k
    if model.kind == "naive-bayes":
        mean, var = s["mean"], s["var"]
        with np.errstate(divide="ignore"):
            logp = np.log(s["prior"])[None, :] - 0.5 * (
                np.log(2 * np.pi * var).sum(1)[None, :] + (((X[:, None, :] - mean[None]) ** 2) / var[None]).sum(2)
            )
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)
    trees = s["trees"]
    weights = s["alphas"] if model.kind == "adaboost-stump" else np.ones(len(trees))
    out = np.zeros((n, K))
    rows = np.arange(n)
    for tree, a in zip(trees, weights):
        out[rows, tree.predict(X)] += a
    return out / weights.sum()


def predict(model: TrainedModel, data: MLDataset | np.ndarray, columns: Sequence[str] | None = None) -> Prediction:
    """Labels and vote fractions; ``data`` may be a dataset or a bare matrix."""
    if isinstance(data, MLDataset):
        X, columns = data.X, data.columns
    else:
        X = np.asarray(data, dtype=float)
        if X.size == 0:
            X = X.reshape(0, model.n_features)
    _check_columns(model, columns, X.shape[1])
    K = len(model.classes)
    if len(X) == 0:
        return Prediction(np.empty(0, dtype=object), np.zeros((0, K)), model.classes)
    votes = vote_matrix(model, X)
    labels = np.array(model.classes, dtype=object)[np.argmax(votes, axis=1)]
    return Prediction(labels, votes, model.classes)


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict()))


def load_model(path: str | Path) -> TrainedModel:
    try:
        return TrainedModel.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"cannot load model {path}: {exc}") from exc
