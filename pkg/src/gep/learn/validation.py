"""Stratified k-fold and 5x2 cross-validation.

Balancing is applied to training folds only; the held-out rows are always a
plain subset of the input. The aggregate report pools every fold's
confusion matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ..evaluate import ConfusionMatrix, EvaluationReport, confusion, report
from .dataset import MLDataset
from .models import order_labels, predict, train
from .sampling import balance_equal_size, oversample, rng_for, stratified_parts

SCHEMES = ("stratified-10-fold", "5x2-fold")
BALANCING = ("none", "equal-size", "oversample")


@dataclass(frozen=True)
class Fold:
    train: np.ndarray
    test: np.ndarray


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[Fold]:
    n = len(y)
    if n < 2:
        raise DataError("cross-validation needs at least 2 rows")
    if k > n:
        warnings.warn(f"only {n} rows: using {n} folds instead of {k}", stacklevel=2)
        k = n
    smallest = min(np.unique(np.asarray(y.tolist(), dtype=str), return_counts=True)[1])
    if smallest < k:
        warnings.warn(f"smallest class has {smallest} rows, fewer than {k} folds; some folds miss it", stacklevel=2)
    parts = stratified_parts(y, range(k), rng_for(seed))
    return [Fold(np.flatnonzero(parts != f), np.flatnonzero(parts == f)) for f in range(k)]


def five_by_two_folds(y: np.ndarray, seed: int) -> list[Fold]:
    """Five seeded stratified halvings, each used in both directions."""
    if len(y) < 2:
        raise DataError("cross-validation needs at least 2 rows")
    folds = []
    for r in range(5):
        parts = stratified_parts(y, (0, 1), rng_for(seed, r))
        a, b = np.flatnonzero(parts == 0), np.flatnonzero(parts == 1)
        folds += [Fold(a, b), Fold(b, a)]
    return folds


def make_folds(y: np.ndarray, scheme: str, seed: int) -> list[Fold]:
    if scheme == "stratified-10-fold":
        return stratified_folds(y, 10, seed)
    if scheme == "5x2-fold":
        return five_by_two_folds(y, seed)
    raise ConfigError(f"unknown CV scheme {scheme!r}; choose from {', '.join(SCHEMES)}")


def rebalance(data: MLDataset, balancing: str, seed: int) -> MLDataset:
    if balancing == "none":
        return data
    if balancing == "equal-size":
        return balance_equal_size(data, seed)
    if balancing == "oversample":
        return oversample(data, seed)
    raise ConfigError(f"unknown balancing {balancing!r}; choose from {', '.join(BALANCING)}")


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


@dataclass(frozen=True)
class CVResult:
    folds: tuple[EvaluationReport, ...]
    aggregate: EvaluationReport
    confusion: ConfusionMatrix
    splits: tuple[Fold, ...]

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate.to_dict(),
            "folds": [r.to_dict() for r in self.folds],
            "confusion": {"classes": list(self.confusion.classes), "counts": self.confusion.counts.tolist()},
        }


def cross_validate(
    data: MLDataset,
    kind: str,
    params: dict | None = None,
    scheme: str = "stratified-10-fold",
    seed: int = 0,
    balancing: str = "none",
    extra_train: MLDataset | None = None,
) -> CVResult:
    """Evaluate ``kind`` on held-out folds.

    ``extra_train`` rows (for enrichment) are appended to every training
    fold and never to a test fold.
    """
    if len(data) < 2:
        raise DataError("cross-validation needs at least 2 rows")
    folds = make_folds(data.y, scheme, seed)
    classes = order_labels(data.y.tolist() + (extra_train.y.tolist() if extra_train is not None else []))
    reports, total = [], None
    for i, fold in enumerate(folds):
        s = fold_seed(seed, i)
        tr = data.subset(fold.train)
        if extra_train is not None and len(extra_train):
            tr = tr.concat(extra_train)
        tr = rebalance(tr, balancing, s)
        te = data.subset(fold.test)
        model = train(tr, kind, params, seed=s)
        cm = confusion(te.y.tolist(), predict(model, te).labels.tolist(), classes)
        reports.append(report(cm))
        total = cm if total is None else total + cm
    return CVResult(tuple(reports), report(total), total, tuple(folds))
