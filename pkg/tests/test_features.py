from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from gep.chains import build_chains
from gep.community import Community
from gep.errors import DataError
from gep.features import (
    FEATURE_NAMES,
    NODE_MEASURES,
    N_FEATURES,
    STATS,
    FeatureExtractor,
    StateContext,
    build_dataset,
    catalog,
    column_mask,
    extract_state_features,
    feature_kind,
    state_columns,
    structural_features,
    write_catalog,
)
from gep.snapshot import SnapshotGraph
from gep.tracking import EventType, EvolutionEvent


def test_catalog_shape():
    assert N_FEATURES == 91 and len(set(FEATURE_NAMES)) == 91
    kinds = Counter(d.kind for d in catalog())
    assert kinds == {"microscopic-local": 28 + 9, "microscopic-global": 28, "mesoscopic": 19, "macroscopic": 7}
    assert len(state_columns(3)) == 273
    assert state_columns(2)[0].endswith("_T-2") and state_columns(2)[-1].endswith("_T-1")
    assert feature_kind("beta_T-2") == "mesoscopic"


def test_write_catalog(tmp_path):
    write_catalog(tmp_path / "c.json")
    assert '"version": "1"' in (tmp_path / "c.json").read_text()


def test_known_values_on_barbell():
    # triangle {0,1,2} bridged to a triangle {3,4,5}
    g = SnapshotGraph.from_edges([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])
    f = structural_features({0, 1, 2}, g)
    assert f["group_size"] == 3 and f["group_edges"] == 3
    assert f["group_density"] == 1.0
    assert f["neighborhood_all"] == 1.0
    assert f["network_ratio_size"] == 0.5
    assert f["network_ratio_edges"] == pytest.approx(3 / 7)
    assert f["sum_group_degree_total"] == 6.0 and f["max_network_degree_total"] == 3.0
    assert f["ilhan_conductance"] == pytest.approx(1 / 7)
    assert f["ilhan_inter"] == pytest.approx(1 / 9)
    assert f["group_diameter"] == 1.0 and f["group_avg_path_length"] == 1.0
    assert f["network_component_count"] == 1.0


def test_context_features():
    g = SnapshotGraph.from_edges([(0, 1), (1, 2), (0, 2)], window_index=3)
    c = Community(3, 0, frozenset({0, 1, 2}))
    vec = extract_state_features(c, g, StateContext(alpha=70, beta=40, previous_event=4, age=2, windows_elapsed=4))
    named = dict(zip(FEATURE_NAMES, vec))
    assert (named["alpha"], named["beta"], named["previous_event"], named["ilhan_aging"]) == (70, 40, 4, 0.5)
    with pytest.raises(DataError):
        extract_state_features(c, SnapshotGraph.from_edges([(0, 1)], window_index=2))


@settings(max_examples=250, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.7), st.booleans(), st.integers(0, 10**6))
def test_aggregate_invariants(n, p, directed, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p, directed)
    size = int(rng.integers(1, n + 1))
    members = frozenset(rng.choice(n, size, replace=False).tolist())
    f = structural_features(members, g)
    vals = np.array([f[k] for k in f])
    assert np.all(np.isfinite(vals))
    for scope in ("group", "network"):
        for m in NODE_MEASURES:
            s, a, lo, hi = (f[f"{stat}_{scope}_{m}"] for stat in STATS)
            assert lo <= a + 1e-12 and a <= hi + 1e-12
            assert s == pytest.approx(size * a, abs=1e-9)


def test_column_mask():
    assert column_mask(2).sum() == 182
    m = column_mask(3, last_states=1)
    assert m.sum() == 91 and m[-91:].all()
    m = column_mask(2, features=["alpha", "beta"])
    assert m.sum() == 4
    with pytest.raises(DataError):
        column_mask(1, features=["nope"])
    with pytest.raises(DataError):
        column_mask(2, last_states=3)


def scenario():
    snaps = {w: SnapshotGraph.from_edges([(0, 1), (1, 2), (0, 2), (2, 3)] + ([(3, 0)] if w else []), window_index=w) for w in range(3)}
    comms = {(w, 0): Community(w, 0, frozenset({0, 1, 2, 3} if w else {0, 1, 2})) for w in range(3)}
    events = [
        EvolutionEvent((0, 0), (1, 0), EventType.GROWING, 75.0, 60.0),
        EvolutionEvent((1, 0), (2, 0), EventType.CONTINUING, 100.0, 100.0),
    ]
    return snaps, comms, events


def test_build_dataset_rows_and_mask():
    snaps, comms, events = scenario()
    ext = FeatureExtractor(snaps, comms, events)
    chains = build_chains(events, 2)
    ds = build_dataset(chains, ext, 2)
    assert ds.X.shape == (1, 182) and ds.y.tolist() == ["continuing"]
    row = dict(zip(ds.columns, ds.X[0]))
    assert row["alpha_T-1"] == 75.0 and row["previous_event_T-1"] == EventType.GROWING.ordinal
    assert row["ilhan_aging_T-1"] == pytest.approx(1 / 2)
    ds1 = build_dataset(build_chains(events, 1), ext, mask=column_mask(1, features=["group_size"]))
    assert ds1.columns == ("group_size_T-1",) and ds1.X[:, 0].tolist() == [3.0, 4.0]
    with pytest.raises(DataError):
        build_dataset([], ext)
    with pytest.raises(DataError):
        build_dataset(chains, ext, 3)
