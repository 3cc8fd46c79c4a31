"""Class balancing, stratified partitions and training-set enrichment."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..errors import DataError
from .dataset import MLDataset


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` and an optional sub-stream path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *stream])))


def _by_class(y: np.ndarray) -> dict[str, np.ndarray]:
    labels = y.tolist()
    out: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        out.setdefault(lab, []).append(i)
    return {k: np.array(v, dtype=np.int64) for k, v in sorted(out.items())}


def balance_equal_size(data: MLDataset, seed: int = 0) -> MLDataset:
    """Undersample every class, without replacement, to the minority count."""
    groups = _by_class(data.y)
    if len(groups) <= 1:
        return data
    m = min(len(v) for v in groups.values())
    rng = rng_for(seed)
    keep = np.concatenate([np.sort(rng.choice(rows, size=m, replace=False)) for rows in groups.values()])
    return data.subset(np.sort(keep))


def oversample(data: MLDataset, seed: int = 0) -> MLDataset:
    """Duplicate random rows of each class (with replacement) up to the majority count."""
    groups = _by_class(data.y)
    if len(groups) <= 1:
        return data
    top = max(len(v) for v in groups.values())
    rng = rng_for(seed)
    extra = [rng.choice(rows, size=top - len(rows), replace=True) for rows in groups.values() if len(rows) < top]
    if not extra:
        return data
    extra = np.concatenate(extra)
    dup = data.subset(extra)
    seen: dict[str, int] = {}
    ids = []
    for rid in dup.row_ids:
        seen[rid] = seen.get(rid, 0) + 1
        ids.append(f"{rid}~{seen[rid]}")
    dup = MLDataset(dup.X, dup.y, dup.columns, tuple(ids), dup.provenance)
    return data.concat(dup)


def stratified_parts(y: np.ndarray, pattern: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Assign each row a part id by dealing shuffled, class-sorted rows over ``pattern``.

    Rows are shuffled, stably grouped by class, and position ``p`` gets part
    ``pattern[p % len(pattern)]``. Each part's per-class count is within one
    row of its proportional share, and overall part sizes follow the pattern.
    """
    n = len(y)
    perm = rng.permutation(n)
    labels = np.asarray(y.tolist(), dtype=object)[perm]
    order = perm[np.argsort(labels.astype(str), kind="stable")]
    parts = np.empty(n, dtype=np.int64)
    parts[order] = np.asarray(pattern, dtype=np.int64)[np.arange(n) % len(pattern)]
    return parts


# 3:1:4 dealing gives 0.375 / 0.125 / 0.5
TRAIN_VAL_TEST_PATTERN = (0, 0, 0, 1, 2, 2, 2, 2)


def split_train_val_test(data: MLDataset, seed: int = 0) -> tuple[MLDataset, MLDataset, MLDataset]:
    """Stratified 0.375 / 0.125 / 0.5 split."""
    if len(data) < len(TRAIN_VAL_TEST_PATTERN):
        raise DataError(f"need at least {len(TRAIN_VAL_TEST_PATTERN)} rows for a train/val/test split, got {len(data)}")
    parts = stratified_parts(data.y, TRAIN_VAL_TEST_PATTERN, rng_for(seed))
    return tuple(data.subset(np.flatnonzero(parts == p)) for p in range(3))  # type: ignore[return-value]


def split_train_val(data: MLDataset, seed: int = 0) -> tuple[MLDataset, MLDataset]:
    """Stratified 0.75 / 0.25 split (the train/val part of a train/val/test split)."""
    if len(data) < 4:
        raise DataError(f"need at least 4 rows for a train/val split, got {len(data)}")
    parts = stratified_parts(data.y, (0, 0, 0, 1), rng_for(seed))
    return data.subset(np.flatnonzero(parts == 0)), data.subset(np.flatnonzero(parts == 1))


def enrich_training(base: MLDataset, external: MLDataset, classes: Iterable[str] | None = None) -> MLDataset:
    """Append external rows (optionally only those labelled with ``classes``) to ``base``."""
    if external.signature != base.signature:
        raise DataError("external dataset has a different feature signature (catalog or chain length)")
    rows = np.arange(len(external))
    if classes is not None:
        wanted = set(classes)
        rows = np.array([i for i, lab in enumerate(external.y.tolist()) if lab in wanted], dtype=np.int64)
    if len(rows) == 0:
        return base
    ext = external.subset(rows)
    ext = MLDataset(ext.X, ext.y, ext.columns, tuple(f"ext:{r}" for r in ext.row_ids), ext.provenance)
    return base.concat(ext)
