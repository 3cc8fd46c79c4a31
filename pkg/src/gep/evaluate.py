"""Classification quality measures and Friedman rank aggregation.

Undefined ratios (0/0 precision or recall) count as 0, so a class that is
never predicted gets F = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: np.ndarray  # rows = actual, cols = predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        classes = tuple(sorted(set(self.classes) | set(other.classes)))
        out = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for cm in (self, other):
            idx = [classes.index(c) for c in cm.classes]
            out[np.ix_(idx, idx)] += cm.counts
        return ConfusionMatrix(classes, out)


def confusion(actual: Sequence, predicted: Sequence, classes: Sequence[str] | None = None) -> ConfusionMatrix:
    actual, predicted = list(actual), list(predicted)
    if len(actual) != len(predicted):
        raise DataError(f"length mismatch: {len(actual)} actual vs {len(predicted)} predicted labels")
    if not actual:
        raise DataError("cannot tabulate an empty prediction set")
    if classes is None:
        classes = sorted(set(actual) | set(predicted))
    classes = tuple(classes)
    pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for a, p in zip(actual, predicted):
        counts[pos[a], pos[p]] += 1
    return ConfusionMatrix(classes, counts)


def _div(a: float, b: float) -> float:
    return float(a) / float(b) if b else 0.0


def f_measure(precision: float, recall: float) -> float:
    return _div(2 * precision * recall, precision + recall)


def plain_average(f_values: Sequence[float]) -> float:
    """Unweighted mean of per-class F-measures (the headline score)."""
    return float(np.mean(f_values)) if len(f_values) else 0.0


def weighted_average(f_values: Sequence[float], supports: Sequence[float]) -> float:
    supports = np.asarray(supports, dtype=float)
    return _div(float(np.dot(f_values, supports)), supports.sum())


@dataclass(frozen=True)
class EvaluationReport:
    classes: tuple[str, ...]
    support: tuple[int, ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f: tuple[float, ...]
    plain_f: float
    macro_f: float
    micro_f: float
    weighted_f: float
    accuracy: float

    def per_class(self) -> dict[str, dict[str, float]]:
        return {
            c: {"support": s, "precision": p, "recall": r, "f": f}
            for c, s, p, r, f in zip(self.classes, self.support, self.precision, self.recall, self.f)
        }

    def f_of(self, label: str) -> float:
        return self.f[self.classes.index(label)] if label in self.classes else 0.0

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "per_class": self.per_class(),
            "plain_f": self.plain_f,
            "macro_f": self.macro_f,
            "micro_f": self.micro_f,
            "weighted_f": self.weighted_f,
            "accuracy": self.accuracy,
            "distribution": dict(zip(self.classes, self.support)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def report(cm: ConfusionMatrix) -> EvaluationReport:
    c = cm.counts.astype(float)
    if c.sum() == 0:
        raise DataError("empty confusion matrix")
    tp = np.diag(c)
    fp = c.sum(axis=0) - tp
    fn = c.sum(axis=1) - tp
    precision = [_div(a, a + b) for a, b in zip(tp, fp)]
    recall = [_div(a, a + b) for a, b in zip(tp, fn)]
    f = [f_measure(p, r) for p, r in zip(precision, recall)]
    support = c.sum(axis=1)

    p_micro = _div(tp.sum(), tp.sum() + fp.sum())
    r_micro = _div(tp.sum(), tp.sum() + fn.sum())
    p_macro, r_macro = float(np.mean(precision)), float(np.mean(recall))
    return EvaluationReport(
        classes=cm.classes,
        support=tuple(int(s) for s in support),
        precision=tuple(precision),
        recall=tuple(recall),
        f=tuple(f),
        plain_f=plain_average(f),
        macro_f=f_measure(p_macro, r_macro),
        micro_f=f_measure(p_micro, r_micro),
        weighted_f=weighted_average(f, support),
        accuracy=_div(tp.sum(), c.sum()),
    )


def evaluate(actual: Sequence, predicted: Sequence, classes: Sequence[str] | None = None) -> EvaluationReport:
    return report(confusion(actual, predicted, classes))


@dataclass(frozen=True)
class FriedmanResult:
    average_ranks: tuple[float, ...]
    statistic: float
    p_value: float
    n_datasets: int


def friedman_ranks(scores: np.ndarray) -> FriedmanResult:
    """Average ranks of algorithms (rows) over datasets (columns).

    Rank 1 is the highest score; ties share the average rank. The statistic
    is Friedman's chi-square with k - 1 degrees of freedom.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise DataError("score table must be 2-D (algorithms x datasets)")
    k, n = scores.shape
    if k < 2 or n < 2:
        raise DataError(f"need at least 2 algorithms and 2 datasets, got {k} x {n}")
    if np.isnan(scores).any():
        raise DataError("score table has missing cells")
    ranks = np.column_stack([stats.rankdata(-scores[:, j]) for j in range(n)])
    avg = ranks.mean(axis=1)
    chi2 = 12 * n / (k * (k + 1)) * (np.sum(avg**2) - k * (k + 1) ** 2 / 4)
    chi2 = max(float(chi2), 0.0)
    p = float(stats.chi2.sf(chi2, k - 1))
    return FriedmanResult(tuple(float(r) for r in avg), chi2, p, n)


def write_report(rep: EvaluationReport, path: str | Path) -> None:
    Path(path).write_text(rep.to_json())


def write_comparison_matrix(names: Sequence[str], reports: Sequence[EvaluationReport], path: str | Path) -> None:
    """Classifier x class F-measure grid, one row per classifier, plus the plain average."""
    classes = sorted(set().union(*(r.classes for r in reports))) if reports else []
    lines = [",".join(["classifier", *classes, "plain_f"])]
    for name, r in zip(names, reports):
        lines.append(",".join([name, *(repr(r.f_of(c)) for c in classes), repr(r.plain_f)]))
    Path(path).write_text("\n".join(lines) + "\n")


def report_from_dict(d: dict) -> EvaluationReport:
    classes = tuple(d["classes"])
    pc = d["per_class"]
    return EvaluationReport(
        classes,
        tuple(int(pc[c]["support"]) for c in classes),
        tuple(pc[c]["precision"] for c in classes),
        tuple(pc[c]["recall"] for c in classes),
        tuple(pc[c]["f"] for c in classes),
        d["plain_f"],
        d["macro_f"],
        d["micro_f"],
        d["weighted_f"],
        d["accuracy"],
    )


__all__ = [
    "ConfusionMatrix",
    "EvaluationReport",
    "FriedmanResult",
    "confusion",
    "evaluate",
    "f_measure",
    "friedman_ranks",
    "plain_average",
    "report",
    "weighted_average",
    "write_comparison_matrix",
    "write_report",
]
