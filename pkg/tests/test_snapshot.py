from __future__ import annotations

from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from gep.errors import ConfigError, DataError
from gep.ingest import InteractionRecord, TemporalEventStream
from gep.snapshot import (
    GraphBuildSpec,
    SnapshotGraph,
    build_snapshot,
    eigenvector_centrality,
    global_clustering,
    induced_subgraph,
    write_snapshot,
)


def to_nx(g: SnapshotGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    for i, nb in enumerate(g.neighbors):
        h.add_edges_from((i, j) for j in nb)
    return h


def bfs_all_pairs(g: SnapshotGraph) -> np.ndarray:
    n = g.n
    dist = np.full((n, n), -1)
    for s in range(n):
        dist[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for v in frontier:
                for w in g.neighbors[v]:
                    if dist[s, w] < 0:
                        dist[s, w] = dist[s, v] + 1
                        nxt.append(w)
            frontier = nxt
    return dist


def test_build_snapshot_weight_rules():
    recs = [InteractionRecord("a", "b", 1, 2.0), InteractionRecord("b", "a", 2, 3.0), InteractionRecord("a", "a", 3)]
    s = TemporalEventStream.from_records(recs)
    count = build_snapshot(s, 0, 3)
    assert count.weight(0, 1) == 2.0 and count.edge_count == 1
    assert build_snapshot(s, 0, 3, GraphBuildSpec(weight_rule="sum")).weight(0, 1) == 5.0
    assert build_snapshot(s, 0, 3, GraphBuildSpec(weighted=False)).weight(0, 1) == 1.0
    d = build_snapshot(s, 0, 3, GraphBuildSpec(directed=True))
    assert d.edge_count == 2 and d.network.reciprocity == 1.0
    with pytest.raises(DataError):
        build_snapshot(s, 2, 2)
    with pytest.raises(ConfigError):
        GraphBuildSpec(weight_rule="binary")


def test_path_graph_measures():
    g = SnapshotGraph.from_edges([(0, 1), (1, 2), (2, 3)])
    m = g.measures
    assert m.betweenness.tolist() == [0.0, 2.0, 2.0, 0.0]
    assert m.eccentricity.tolist() == [3.0, 2.0, 2.0, 3.0]
    assert m.closeness[0] == pytest.approx(3 / 6)
    assert m.degree_total.tolist() == [1, 2, 2, 1]


def test_directed_degrees():
    g = SnapshotGraph.from_edges([(0, 1), (0, 2), (2, 0)], directed=True)
    m = g.measures
    assert m.degree_out.tolist() == [2, 0, 1]
    assert m.degree_in.tolist() == [1, 1, 1]
    assert m.degree_total.tolist() == [3, 1, 2]
    assert g.network.reciprocity == pytest.approx(2 / 3)


def test_network_measures_star():
    g = SnapshotGraph.from_edges([(0, i) for i in range(1, 5)])
    net = g.network
    assert net.density == pytest.approx(4 / 10)
    assert net.leadership == pytest.approx(1.0)
    assert net.clustering == 0.0
    assert net.component_count == 1


def test_eigenvector_handles_empty_and_edgeless():
    g = SnapshotGraph([1, 2, 3], {})
    vec, ok = eigenvector_centrality(g.adjacency_matrix())
    assert ok and vec.tolist() == [0.0, 0.0, 0.0]
    vec, ok = eigenvector_centrality(SnapshotGraph([], {}).adjacency_matrix())
    assert ok and len(vec) == 0


def test_induced_subgraph_rejects_unknown():
    g = SnapshotGraph.from_edges([(0, 1)])
    with pytest.raises(DataError):
        induced_subgraph(g, [0, 7])
    assert induced_subgraph(g, [0, 1]).edge_count == 1


def test_write_snapshot(tmp_path):
    g = SnapshotGraph.from_edges([(0, 1), (1, 2)], window_index=4)
    write_snapshot(g, tmp_path, labels=["a", "b", "c"])
    assert (tmp_path / "window_4.csv").read_text().splitlines()[1] == "a,b,1.0"
    assert len((tmp_path / "window_4_measures.csv").read_text().splitlines()) == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25), st.floats(0.05, 0.6), st.integers(0, 10**6))
def test_measures_agree_with_networkx(n, p, seed):
    g = random_graph(np.random.default_rng(seed), n, p)
    h = to_nx(g)
    m = g.measures
    bc = nx.betweenness_centrality(h, normalized=False)
    cl = nx.closeness_centrality(h, wf_improved=False)
    for i in range(n):
        assert m.betweenness[i] == pytest.approx(bc[i], abs=1e-9)
        assert m.closeness[i] == pytest.approx(cl[i], abs=1e-9)
    assert g.network.clustering == pytest.approx(nx.transitivity(h), abs=1e-12)
    assert g.network.component_count == nx.number_connected_components(h)
    dist = bfs_all_pairs(g)
    assert m.eccentricity.tolist() == dist.max(axis=1).astype(float).tolist()


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.integers(0, 10**6))
def test_clustering_brute_force(n, seed):
    g = random_graph(np.random.default_rng(seed), n, 0.5)
    adj = [set(nb) for nb in g.neighbors]
    tri = sum(1 for a, b, c in combinations(range(n), 3) if b in adj[a] and c in adj[a] and c in adj[b])
    triples = sum(len(s) * (len(s) - 1) // 2 for s in adj)
    assert global_clustering(g.neighbors) == pytest.approx(3 * tri / triples if triples else 0.0)
