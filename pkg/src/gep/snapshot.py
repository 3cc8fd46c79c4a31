"""Per-window graphs and the structural measures the features are built from.

All distance-based measures (closeness, betweenness, eccentricity, path
lengths) and eigenvector centrality use the symmetrized, unweighted graph.
Degrees keep direction.
"""

from __future__ import annotations

import csv
import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataError
from .ingest import TemporalEventStream

WEIGHT_RULES = ("count", "sum", "binary")

EIGEN_TOL = 1e-8
EIGEN_MAX_ITER = 1000


@dataclass(frozen=True)
class GraphBuildSpec:
    directed: bool = False
    weighted: bool = True
    weight_rule: str = "count"

    def __post_init__(self) -> None:
        if self.weight_rule not in WEIGHT_RULES:
            raise ConfigError(f"unknown weight rule {self.weight_rule!r}")
        if self.weight_rule == "binary" and self.weighted:
            raise ConfigError("binary weight rule implies an unweighted graph")

    def to_dict(self) -> dict:
        return {"directed": self.directed, "weighted": self.weighted, "weight_rule": self.weight_rule}

    @classmethod
    def from_dict(cls, d: dict) -> "GraphBuildSpec":
        return cls(bool(d.get("directed", False)), bool(d.get("weighted", True)), d.get("weight_rule", "count"))


@dataclass(frozen=True)
class NodeMeasureTable:
    """Per-node measures aligned with ``SnapshotGraph.nodes``."""

    degree_in: np.ndarray
    degree_out: np.ndarray
    degree_total: np.ndarray
    closeness: np.ndarray
    betweenness: np.ndarray
    eigenvector: np.ndarray
    eccentricity: np.ndarray
    eigenvector_converged: bool = True

    MEASURES = ("degree_in", "degree_out", "degree_total", "closeness", "betweenness", "eigenvector", "eccentricity")

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)


@dataclass(frozen=True)
class NetworkMeasureRecord:
    node_count: int
    edge_count: int
    density: float
    reciprocity: float
    leadership: float
    clustering: float
    component_count: int


@dataclass(frozen=True)
class PathStats:
    betweenness: np.ndarray
    closeness: np.ndarray
    eccentricity: np.ndarray
    component: np.ndarray
    distance_sum: int
    reachable_pairs: int


class SnapshotGraph:
    """Immutable graph of one window.

    ``nodes`` holds global (stream-interned) node ids in ascending order;
    adjacency is stored on local indices.
    """

    def __init__(
        self,
        nodes: Iterable[int],
        edges: dict[tuple[int, int], float],
        directed: bool = False,
        window_index: int = 0,
    ) -> None:
        self.nodes = tuple(sorted(set(nodes)))
        self.index = {v: i for i, v in enumerate(self.nodes)}
        self.directed = directed
        self.window_index = window_index
        n = len(self.nodes)
        succ: list[dict[int, float]] = [dict() for _ in range(n)]
        for (u, v), w in edges.items():
            if u == v:
                continue
            if w <= 0:
                continue
            try:
                iu, iv = self.index[u], self.index[v]
            except KeyError as exc:
                raise DataError(f"edge endpoint {exc.args[0]} not in node set") from None
            if directed:
                succ[iu][iv] = float(w)
            else:
                succ[iu][iv] = float(w)
                succ[iv][iu] = float(w)
        self._succ = succ

    # -- structure -----------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple],
        nodes: Iterable[int] = (),
        directed: bool = False,
        window_index: int = 0,
    ) -> "SnapshotGraph":
        """Convenience constructor: ``edges`` are ``(u, v)`` or ``(u, v, w)``."""
        table: dict[tuple[int, int], float] = {}
        node_set = set(nodes)
        for e in edges:
            u, v = e[0], e[1]
            w = e[2] if len(e) > 2 else 1.0
            node_set.update((u, v))
            key = (u, v) if directed else (min(u, v), max(u, v))
            table[key] = table.get(key, 0.0) + w
        return cls(node_set, table, directed=directed, window_index=window_index)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def edge_count(self) -> int:
        total = sum(len(s) for s in self._succ)
        return total if self.directed else total // 2

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for iu, nb in enumerate(self._succ):
            for iv, w in nb.items():
                if self.directed or iu < iv:
                    out.append((self.nodes[iu], self.nodes[iv], w))
        return out

    def weight(self, u: int, v: int) -> float:
        return self._succ[self.index[u]].get(self.index[v], 0.0)

    def has_edge(self, u: int, v: int) -> bool:
        if u not in self.index or v not in self.index:
            return False
        return self.index[v] in self._succ[self.index[u]]

    @cached_property
    def _pred(self) -> list[dict[int, float]]:
        if not self.directed:
            return self._succ
        pred: list[dict[int, float]] = [dict() for _ in range(self.n)]
        for iu, nb in enumerate(self._succ):
            for iv, w in nb.items():
                pred[iv][iu] = w
        return pred

    @cached_property
    def neighbors(self) -> list[list[int]]:
        """Symmetrized neighbor lists on local indices."""
        if not self.directed:
            return [sorted(nb) for nb in self._succ]
        return [sorted(set(self._succ[i]) | set(self._pred[i])) for i in range(self.n)]

    def out_degree(self) -> np.ndarray:
        return np.array([len(nb) for nb in self._succ], dtype=float)

    def in_degree(self) -> np.ndarray:
        return np.array([len(nb) for nb in self._pred], dtype=float)

    def symmetric_weights(self) -> dict[int, dict[int, float]]:
        """Weighted undirected view; reciprocal directed weights are summed."""
        out: dict[int, dict[int, float]] = {i: {} for i in range(self.n)}
        for iu, nb in enumerate(self._succ):
            for iv, w in nb.items():
                if self.directed:
                    out[iu][iv] = out[iu].get(iv, 0.0) + w
                    out[iv][iu] = out[iv].get(iu, 0.0) + w
                else:
                    out[iu][iv] = w
        return out

    def adjacency_matrix(self) -> sp.csr_matrix:
        """Binary symmetrized adjacency."""
        rows, cols = [], []
        for i, nb in enumerate(self.neighbors):
            rows.extend([i] * len(nb))
            cols.extend(nb)
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    # -- measures --------------------------------------------------------

    @cached_property
    def path_stats(self) -> PathStats:
        return shortest_path_stats(self.neighbors)

    @cached_property
    def measures(self) -> NodeMeasureTable:
        return node_measures(self)

    @cached_property
    def network(self) -> NetworkMeasureRecord:
        return network_measures(self)

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"SnapshotGraph(window={self.window_index}, n={self.n}, m={self.edge_count}, {kind})"


def build_snapshot(
    stream: TemporalEventStream,
    lo: int,
    hi: int,
    spec: GraphBuildSpec = GraphBuildSpec(),
    window_index: int = 0,
) -> SnapshotGraph:
    """Fold records ``[lo, hi)`` of ``stream`` into a graph."""
    if hi <= lo:
        raise DataError(f"window {window_index}: cannot build a snapshot from an empty record slice")
    edges: dict[tuple[int, int], float] = {}
    nodes: set[int] = set()
    src = stream.sources[lo:hi]
    dst = stream.targets[lo:hi]
    wts = stream.weights[lo:hi]
    for u, v, w in zip(src.tolist(), dst.tolist(), wts.tolist()):
        nodes.add(u)
        nodes.add(v)
        if u == v:
            continue
        key = (u, v) if spec.directed else (min(u, v), max(u, v))
        if spec.weight_rule == "count":
            edges[key] = edges.get(key, 0.0) + 1.0
        elif spec.weight_rule == "sum":
            edges[key] = edges.get(key, 0.0) + w
        else:
            edges[key] = 1.0
    if not spec.weighted:
        edges = {k: 1.0 for k, w in edges.items() if w > 0}
    return SnapshotGraph(nodes, edges, directed=spec.directed, window_index=window_index)


def induced_subgraph(g: SnapshotGraph, nodes: Iterable[int]) -> SnapshotGraph:
    nodes = set(nodes)
    unknown = nodes - set(g.index)
    if unknown:
        raise DataError(f"unknown node ids {sorted(unknown)[:5]} for window {g.window_index}")
    edges = {(u, v): w for u, v, w in g.edges() if u in nodes and v in nodes}
    return SnapshotGraph(nodes, edges, directed=g.directed, window_index=g.window_index)


def shortest_path_stats(neighbors: Sequence[Sequence[int]]) -> PathStats:
    """Brandes accumulation plus BFS distance summaries from every source.

    Betweenness is unnormalized with each unordered pair counted once.
    """
    n = len(neighbors)
    bc = np.zeros(n)
    closeness = np.zeros(n)
    ecc = np.zeros(n)
    comp = np.full(n, -1, dtype=np.int64)
    dist_sum_total = 0
    pairs_total = 0
    n_comp = 0
    for s in range(n):
        if comp[s] < 0:
            comp[s] = n_comp
            q = deque([s])
            while q:
                v = q.popleft()
                for w in neighbors[v]:
                    if comp[w] < 0:
                        comp[w] = n_comp
                        q.append(w)
            n_comp += 1

        dist = [-1] * n
        sigma = [0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        order = []
        dist[s] = 0
        sigma[s] = 1
        q = deque([s])
        while q:
            v = q.popleft()
            order.append(v)
            dv = dist[v] + 1
            for w in neighbors[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    q.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
        reach = len(order)
        total = sum(dist[v] for v in order)
        if reach > 1:
            closeness[s] = (reach - 1) / total
            ecc[s] = dist[order[-1]]
        dist_sum_total += total
        pairs_total += reach - 1
    return PathStats(bc / 2.0, closeness, ecc, comp, dist_sum_total, pairs_total)


def eigenvector_centrality(
    adjacency: sp.spmatrix, tol: float = EIGEN_TOL, max_iter: int = EIGEN_MAX_ITER
) -> tuple[np.ndarray, bool]:
    """Power iteration on ``A + I`` from a uniform start.

    The identity shift keeps the iteration from oscillating on bipartite
    components without changing the dominant eigenvector. Returns the
    unit-norm vector and a convergence flag.
    """
    n = adjacency.shape[0]
    if n == 0:
        return np.zeros(0), True
    if adjacency.nnz == 0:
        return np.zeros(n), True
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        y = adjacency @ x + x
        y /= np.linalg.norm(y)
        if np.max(np.abs(y - x)) < tol:
            return y, True
        x = y
    return x, False


def node_measures(g: SnapshotGraph) -> NodeMeasureTable:
    ps = g.path_stats
    eig, ok = eigenvector_centrality(g.adjacency_matrix())
    if not ok:
        warnings.warn(f"eigenvector centrality did not converge for window {g.window_index}", RuntimeWarning)
    d_in, d_out = g.in_degree(), g.out_degree()
    d_tot = d_in + d_out if g.directed else d_out.copy()
    if not g.directed:
        d_in, d_out = d_out.copy(), d_out.copy()
    return NodeMeasureTable(d_in, d_out, d_tot, ps.closeness, ps.betweenness, eig, ps.eccentricity, ok)


def network_measures(g: SnapshotGraph) -> NetworkMeasureRecord:
    n, m = g.n, g.edge_count
    if n < 2:
        density = 0.0
    elif g.directed:
        density = m / (n * (n - 1))
    else:
        density = 2 * m / (n * (n - 1))

    if not g.directed:
        reciprocity = 1.0
    elif m == 0:
        reciprocity = 0.0
    else:
        recip = sum(1 for u, v, _ in g.edges() if g.has_edge(v, u))
        reciprocity = recip / m

    deg = np.array([len(nb) for nb in g.neighbors], dtype=float)
    if n < 3:
        leadership = 0.0
        clustering = 0.0
    else:
        leadership = float(np.sum(deg.max() - deg) / ((n - 1) * (n - 2)))
        clustering = global_clustering(g.neighbors)
    n_comp = int(g.path_stats.component.max() + 1) if n else 0
    return NetworkMeasureRecord(n, m, density, reciprocity, leadership, clustering, n_comp)


def global_clustering(neighbors: Sequence[Sequence[int]]) -> float:
    """Transitivity: 3 * triangles / connected triples."""
    sets = [set(nb) for nb in neighbors]
    closed = 0
    triples = 0
    for v, nb in enumerate(neighbors):
        d = len(nb)
        triples += d * (d - 1) // 2
        for i, a in enumerate(nb):
            sa = sets[a]
            for b in nb[i + 1:]:
                if b in sa:
                    closed += 1
    return closed / triples if triples else 0.0


def write_snapshot(g: SnapshotGraph, directory: str | Path, labels: Sequence[str] | None = None) -> None:
    """Dump ``window_<k>.csv`` (edge list) and ``window_<k>_measures.csv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = (lambda v: labels[v]) if labels is not None else str
    with (directory / f"window_{g.window_index}.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["source", "target", "weight"])
        for u, v, wt in g.edges():
            w.writerow([name(u), name(v), repr(wt)])
    t = g.measures
    with (directory / f"window_{g.window_index}_measures.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", *NodeMeasureTable.MEASURES])
        for i, v in enumerate(g.nodes):
            w.writerow([name(v), *(repr(float(t.column(c)[i])) for c in NodeMeasureTable.MEASURES)])
