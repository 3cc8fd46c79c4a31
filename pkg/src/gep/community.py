"""Community detection per window.

Two detectors share one output type: k-clique percolation (overlapping
communities) and two-phase greedy modularity optimization (disjoint).
Groups with fewer than two members are never reported.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .snapshot import SnapshotGraph

MIN_GROUP_SIZE = 2
MODULARITY_EPS = 1e-7

CommunityId = tuple[int, int]


@dataclass(frozen=True)
class Community:
    window: int
    ordinal: int
    members: frozenset[int]
    detector: str = ""

    @property
    def id(self) -> CommunityId:
        return (self.window, self.ordinal)

    @property
    def size(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"Community({self.window}:{self.ordinal}, size={self.size})"


@dataclass(frozen=True)
class CommunityCover:
    window: int
    communities: tuple[Community, ...]
    node_count: int
    detector: str = ""

    @property
    def coverage(self) -> float:
        if self.node_count == 0:
            return 0.0
        covered = set().union(*(c.members for c in self.communities)) if self.communities else set()
        return len(covered) / self.node_count

    def __iter__(self):
        return iter(self.communities)

    def __len__(self) -> int:
        return len(self.communities)


def make_cover(window: int, groups: Iterable[Iterable[int]], node_count: int, detector: str) -> CommunityCover:
    """Drop undersized groups and number the rest in a canonical order."""
    groups = [tuple(sorted(g)) for g in groups]
    groups = sorted({g for g in groups if len(g) >= MIN_GROUP_SIZE})
    comms = tuple(Community(window, j, frozenset(g), detector) for j, g in enumerate(groups))
    return CommunityCover(window, comms, node_count, detector)


def empty_cover(window: int, node_count: int = 0, detector: str = "") -> CommunityCover:
    return CommunityCover(window, (), node_count, detector)


# -- clique percolation -----------------------------------------------------


def maximal_cliques(neighbors: Sequence[Sequence[int]]) -> list[frozenset[int]]:
    """Bron-Kerbosch with Tomita pivoting."""
    adj = [set(nb) for nb in neighbors]
    out: list[frozenset[int]] = []
    stack = [(set(), set(range(len(adj))), set())]
    while stack:
        r, p, x = stack.pop()
        if not p and not x:
            out.append(frozenset(r))
            continue
        if not p:
            continue
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in list(p - adj[pivot]):
            stack.append((r | {v}, p & adj[v], x & adj[v]))
            p.remove(v)
            x.add(v)
    return out


def detect_cpm(g: SnapshotGraph, k: int = 3) -> CommunityCover:
    """k-clique percolation on the undirected view of ``g``.

    Adjacent k-cliques share k-1 nodes; their connected components are the
    same as those of maximal cliques of size >= k that overlap in >= k-1
    nodes, which is what is computed here.
    """
    if k < 3:
        raise ConfigError(f"clique percolation needs k >= 3, got {k}")
    cliques = [c for c in maximal_cliques(g.neighbors) if len(c) >= k]
    parent = list(range(len(cliques)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_node: dict[int, list[int]] = {}
    for ci, c in enumerate(cliques):
        for v in c:
            by_node.setdefault(v, []).append(ci)
    for ci, c in enumerate(cliques):
        seen = set()
        for v in c:
            for cj in by_node[v]:
                if cj <= ci or cj in seen:
                    continue
                seen.add(cj)
                if len(c & cliques[cj]) >= k - 1:
                    parent[find(ci)] = find(cj)
    groups: dict[int, set[int]] = {}
    for ci, c in enumerate(cliques):
        groups.setdefault(find(ci), set()).update(c)
    members = [{g.nodes[i] for i in grp} for grp in groups.values()]
    return make_cover(g.window_index, members, g.n, f"cpm-k{k}")


# -- modularity -------------------------------------------------------------


def modularity(adj: dict[int, dict[int, float]], partition: Iterable[Iterable[int]]) -> float:
    """Newman modularity of a partition of a weighted undirected graph.

    ``adj[u][v]`` must be symmetric; ``adj[u][u]`` is a self-loop weight.
    """
    label = {}
    for ci, part in enumerate(partition):
        for v in part:
            label[v] = ci
    m = 0.0
    inside: Counter = Counter()
    tot: Counter = Counter()
    for u, nb in adj.items():
        for v, w in nb.items():
            if u == v:
                m += w
                inside[label[u]] += w
                tot[label[u]] += 2 * w
            else:
                tot[label[u]] += w
                if u < v:
                    m += w
                    if label[u] == label[v]:
                        inside[label[u]] += w
    if m == 0:
        return 0.0
    return sum(inside[c] / m - (tot[c] / (2 * m)) ** 2 for c in tot)


@dataclass
class LouvainResult:
    partition: list[set[int]]
    history: list[float] = field(default_factory=list)


def louvain(adj: dict[int, dict[int, float]], seed: int = 0, eps: float = MODULARITY_EPS) -> LouvainResult:
    """Local moving + aggregation until a level gains at most ``eps``.

    Node visit order in each level is a seeded shuffle.
    """
    rng = np.random.default_rng(seed)
    nodes = sorted(adj)
    members: dict[int, set[int]] = {i: {v} for i, v in enumerate(nodes)}
    pos = {v: i for i, v in enumerate(nodes)}
    level: dict[int, dict[int, float]] = {i: {} for i in range(len(nodes))}
    for u, nb in adj.items():
        for v, w in nb.items():
            level[pos[u]][pos[v]] = level[pos[u]].get(pos[v], 0.0) + w if u == v else w
    q = modularity(level, [[i] for i in level])
    history = [q]
    if not any(level[i] for i in level):
        return LouvainResult([set(s) for s in members.values()], history)

    while True:
        assign = _local_moving(level, rng)
        groups: dict[int, list[int]] = {}
        for v, c in assign.items():
            groups.setdefault(c, []).append(v)
        new_q = modularity(level, groups.values())
        if len(groups) == len(level) or new_q - q <= eps:
            break
        q = new_q
        history.append(q)
        relabel = {c: i for i, c in enumerate(sorted(groups))}
        new_members = {relabel[c]: set().union(*(members[v] for v in vs)) for c, vs in groups.items()}
        new_level: dict[int, dict[int, float]] = {i: {} for i in new_members}
        for u, nb in level.items():
            cu = relabel[assign[u]]
            for v, w in nb.items():
                cv = relabel[assign[v]]
                if cu == cv and u != v and u > v:
                    continue
                new_level[cu][cv] = new_level[cu].get(cv, 0.0) + w
        members, level = new_members, new_level
    return LouvainResult(list(members.values()), history)


def _local_moving(level: dict[int, dict[int, float]], rng: np.random.Generator) -> dict[int, int]:
    k = {u: sum(w for v, w in nb.items() if v != u) + 2 * nb.get(u, 0.0) for u, nb in level.items()}
    m2 = sum(k.values())
    assign = {u: u for u in level}
    tot = dict(k)
    order = list(level)
    order = [order[i] for i in rng.permutation(len(order))]
    improved = True
    while improved:
        improved = False
        for u in order:
            cu = assign[u]
            links: dict[int, float] = {}
            for v, w in level[u].items():
                if v != u:
                    links[assign[v]] = links.get(assign[v], 0.0) + w
            tot[cu] -= k[u]
            best, best_gain = cu, links.get(cu, 0.0) - tot[cu] * k[u] / m2
            for c, w_in in sorted(links.items()):
                gain = w_in - tot[c] * k[u] / m2
                if gain > best_gain + 1e-12:
                    best, best_gain = c, gain
            tot[best] += k[u]
            if best != cu:
                assign[u] = best
                improved = True
    return assign


def detect_modularity(g: SnapshotGraph, seed: int = 0) -> CommunityCover:
    sym = g.symmetric_weights()
    result = louvain(sym, seed=seed)
    groups = [{g.nodes[i] for i in part} for part in result.partition]
    return make_cover(g.window_index, groups, g.n, "modularity")


def detect(g: SnapshotGraph, method: str = "modularity", k: int = 3, seed: int = 0) -> CommunityCover:
    if method == "cpm":
        return detect_cpm(g, k)
    if method == "modularity":
        return detect_modularity(g, seed)
    raise ConfigError(f"unknown community detector {method!r}")


@dataclass(frozen=True)
class CoverStats:
    count: int
    size_histogram: dict[int, int]
    coverage: float


def cover_stats(cover: CommunityCover) -> CoverStats:
    hist = Counter(c.size for c in cover.communities)
    return CoverStats(len(cover.communities), dict(sorted(hist.items())), cover.coverage)


def write_covers(covers: Iterable[CommunityCover], path: str | Path, labels: Sequence[str] | None = None) -> None:
    """JSONL, one community per line."""
    with Path(path).open("w") as fh:
        for cover in covers:
            for c in cover.communities:
                members = sorted(c.members)
                if labels is not None:
                    members = [labels[v] for v in members]
                fh.write(json.dumps({"window": c.window, "id": c.ordinal, "members": members}) + "\n")
