"""Gini CART tree on numpy arrays.

Nodes live in flat arrays (``feature``, ``threshold``, ``left``, ``right``,
``value``); a feature of -1 marks a leaf. Rows with ``x[feature] <= threshold``
go left.

Growing is a compiled depth-first loop. When features are sampled per split,
the caller's generator draws one row of sort keys per potential node up
front; node ``i`` (in creation order) tries features in the order of
``argsort(keys[i])``, first the leading ``max_features`` and, only if none of
them separates the rows, the rest.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _best_split(X, y, w, idx, start, end, order, lo, hi, n_classes, tot):
    """Best (feature, threshold, score) over ``order[lo:hi]``; feature -1 if none."""
    n = end - start
    best_f = -1
    best_t = 0.0
    best_s = -1.0
    left = np.empty(n_classes)
    xs = np.empty(n)
    for jj in range(lo, hi):
        f = order[jj]
        for i in range(n):
            xs[i] = X[idx[start + i], f]
        srt = np.argsort(xs)
        left[:] = 0.0
        nl = 0.0
        total_n = 0.0
        for c in range(n_classes):
            total_n += tot[c]
        for p in range(n - 1):
            r = idx[start + srt[p]]
            left[y[r]] += w[r]
            nl += w[r]
            a, b = xs[srt[p]], xs[srt[p + 1]]
            if not b > a:
                continue
            nr = total_n - nl
            if nl <= 0.0 or nr <= 0.0:
                continue
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                sl += left[c] * left[c]
                rc = tot[c] - left[c]
                sr += rc * rc
            s = sl / nl + sr / nr
            if s > best_s:
                best_s = s
                best_f = f
                t = a + (b - a) / 2.0
                best_t = t if (a <= t and t < b) else a
    return best_f, best_t, best_s


@numba.njit(cache=True)
def _grow(X, y, w, rows, n_classes, max_depth, min_split, n_try, keys):
    n, d = rows.shape[0], X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros((cap, n_classes))
    idx = rows.copy()
    buf = np.empty(n, np.int64)
    # stack entries: start, end, depth, parent, is_right
    stack = np.empty((cap, 5), np.int64)
    stack[0, 0], stack[0, 1], stack[0, 2], stack[0, 3], stack[0, 4] = 0, n, 0, -1, 0
    top = 1
    count = 0
    all_feats = np.arange(d)
    while top > 0:
        top -= 1
        start, end, depth, parent, is_right = stack[top, 0], stack[top, 1], stack[top, 2], stack[top, 3], stack[top, 4]
        node = count
        count += 1
        if parent >= 0:
            if is_right:
                right[parent] = node
            else:
                left[parent] = node
        tot = value[node]
        for i in range(start, end):
            tot[y[idx[i]]] += w[idx[i]]
        nonzero = 0
        for c in range(n_classes):
            if tot[c] > 0:
                nonzero += 1
        if end - start < min_split or depth >= max_depth or nonzero <= 1:
            continue
        if n_try < d:
            order = np.argsort(keys[node])
        else:
            order = all_feats
        f, t, s = _best_split(X, y, w, idx, start, end, order, 0, min(n_try, d), n_classes, tot)
        if f < 0 and n_try < d:
            f, t, s = _best_split(X, y, w, idx, start, end, order, n_try, d, n_classes, tot)
        if f < 0:
            continue
        feature[node] = f
        threshold[node] = t
        nl = 0
        nr = 0
        for i in range(start, end):
            r = idx[i]
            if X[r, f] <= t:
                idx[start + nl] = r
                nl += 1
            else:
                buf[nr] = r
                nr += 1
        for i in range(nr):
            idx[start + nl + i] = buf[i]
        mid = start + nl
        stack[top, 0], stack[top, 1], stack[top, 2], stack[top, 3], stack[top, 4] = mid, end, depth + 1, node, 1
        top += 1
        stack[top, 0], stack[top, 1], stack[top, 2], stack[top, 3], stack[top, 4] = start, mid, depth + 1, node, 0
        top += 1
    return feature[:count], threshold[:count], left[:count], right[:count], value[:count]


class DecisionTree:
    def __init__(self, max_depth: int | None = None, min_split: int = 2, max_features: int | None = None) -> None:
        self.max_depth = max_depth
        self.min_split = min_split
        self.max_features = max_features
        self.n_classes = 0
        self.feature = np.zeros(0, dtype=np.int64)
        self.threshold = np.zeros(0)
        self.left = np.zeros(0, dtype=np.int64)
        self.right = np.zeros(0, dtype=np.int64)
        self.value = np.zeros((0, 0))

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        n_classes: int,
        rows: np.ndarray | None = None,
        weights: np.ndarray | None = None,
        rng: np.random.Generator | None = None,
    ) -> "DecisionTree":
        """Grow the tree on ``X[rows]``; ``rows`` may repeat (bootstrap)."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        n, d = X.shape
        self.n_classes = n_classes
        rows = np.arange(n, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
        w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
        n_try = d if self.max_features is None else min(int(self.max_features), d)
        if n_try < d:
            if rng is None:
                raise ValueError("feature sampling needs an rng")
            keys = rng.random((2 * len(rows) + 1, d))
        else:
            keys = np.zeros((1, 1))
        max_depth = np.iinfo(np.int64).max if self.max_depth is None else int(self.max_depth)
        out = _grow(X, np.asarray(y, dtype=np.int64), w, rows, int(n_classes), max_depth, int(self.min_split), n_try, keys)
        self.feature, self.threshold, self.left, self.right, self.value = (a.copy() for a in out)
        return self

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            cur = node[active]
            f = self.feature[cur]
            go_left = X[np.flatnonzero(active), f] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Class index per row; ties inside a leaf go to the lowest index."""
        return np.argmax(self.value[self.apply(X)], axis=1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        v = self.value[self.apply(X)]
        s = v.sum(axis=1, keepdims=True)
        return np.divide(v, s, out=np.zeros_like(v), where=s > 0)

    def to_dict(self) -> dict:
        def rec(i: int) -> dict:
            if self.feature[i] < 0:
                return {"value": [float(v) for v in self.value[i]]}
            return {
                "feature": int(self.feature[i]),
                "threshold": float(self.threshold[i]),
                "value": [float(v) for v in self.value[i]],
                "left": rec(int(self.left[i])),
                "right": rec(int(self.right[i])),
            }

        return {"n_classes": self.n_classes, "root": rec(0)}

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        tree = cls()
        tree.n_classes = d["n_classes"]
        feature, threshold, left, right, value = [], [], [], [], []

        stack = [(d["root"], -1, False)]
        while stack:
            rec, parent, is_right = stack.pop()
            i = len(feature)
            if parent >= 0:
                (right if is_right else left)[parent] = i
            feature.append(rec.get("feature", -1))
            threshold.append(rec.get("threshold", 0.0))
            left.append(-1)
            right.append(-1)
            value.append(rec["value"])
            if "left" in rec:
                stack.append((rec["right"], i, True))
                stack.append((rec["left"], i, False))
        tree.feature = np.array(feature, dtype=np.int64)
        tree.threshold = np.array(threshold, dtype=float)
        tree.left = np.array(left, dtype=np.int64)
        tree.right = np.array(right, dtype=np.int64)
        tree.value = np.array(value, dtype=float)
        return tree
