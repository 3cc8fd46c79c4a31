from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DataError


@dataclass(frozen=True)
class MLDataset:
    """Labeled feature matrix; one row per evolution chain."""

    X: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...]
    row_ids: tuple[str, ...] = ()
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            X = X.reshape(len(self.y), -1)
        y = np.asarray(self.y, dtype=object)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.row_ids:
            object.__setattr__(self, "row_ids", tuple(str(i) for i in range(len(y))))
        else:
            object.__setattr__(self, "row_ids", tuple(self.row_ids))
        if X.shape[0] != len(y) or len(self.row_ids) != len(y):
            raise DataError(f"row count mismatch: X has {X.shape[0]}, y has {len(y)}, ids {len(self.row_ids)}")
        if X.shape[1] != len(self.columns):
            raise DataError(f"column count mismatch: X has {X.shape[1]}, names {len(self.columns)}")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.y.tolist())))

    @property
    def signature(self) -> tuple[str, ...]:
        return self.columns

    def class_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(self.y.tolist()).items()))

    def subset(self, rows: Sequence[int] | np.ndarray) -> "MLDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return MLDataset(self.X[rows], self.y[rows], self.columns, tuple(self.row_ids[i] for i in rows), dict(self.provenance))

    def select_columns(self, cols: Sequence[int] | np.ndarray) -> "MLDataset":
        cols = np.asarray(cols)
        if cols.dtype == bool:
            cols = np.flatnonzero(cols)
        return MLDataset(self.X[:, cols], self.y, tuple(self.columns[i] for i in cols), self.row_ids, dict(self.provenance))

    def concat(self, other: "MLDataset") -> "MLDataset":
        if other.signature != self.signature:
            raise DataError("cannot concatenate datasets with different column signatures")
        return MLDataset(
            np.vstack([self.X, other.X]),
            np.concatenate([self.y, other.y]),
            self.columns,
            self.row_ids + other.row_ids,
            dict(self.provenance),
        )

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row_id", *self.columns, "label"])
            for rid, row, lab in zip(self.row_ids, self.X.tolist(), self.y.tolist()):
                w.writerow([rid, *(repr(v) for v in row), lab])

    @classmethod
    def from_csv(cls, path: str | Path) -> "MLDataset":
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[-1] != "label":
                raise DataError(f"{path}: expected a feature CSV with a trailing 'label' column")
            has_id = header[0] == "row_id"
            cols = header[1:-1] if has_id else header[:-1]
            ids, rows, labels = [], [], []
            for i, rec in enumerate(reader):
                if not rec:
                    continue
                ids.append(rec[0] if has_id else str(i))
                rows.append([float(v) for v in (rec[1:-1] if has_id else rec[:-1])])
                labels.append(rec[-1])
        if not rows:
            raise DataError(f"{path}: no rows")
        return cls(np.array(rows), np.array(labels, dtype=object), tuple(cols), tuple(ids), {"source": str(path)})
