from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gep.community import Community, make_cover
from gep.errors import ConfigError, DataError
from gep.snapshot import SnapshotGraph
from gep.tracking import (
    EventType,
    TrackingConfig,
    classify_pair,
    event_histogram,
    inclusion,
    inclusion_from_importance,
    match_windows,
    read_events,
    track,
    write_events,
    write_histogram,
)


def clique(nodes):
    nodes = list(nodes)
    return [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]


def snaps(*groups_per_window):
    out = {}
    for w, groups in enumerate(groups_per_window):
        edges = [e for g in groups for e in clique(g)]
        out[w] = SnapshotGraph.from_edges(edges, window_index=w)
    return out


def covers_for(snapshots, groups_per_window):
    return [make_cover(w, groups, snapshots[w].n, "test") for w, groups in enumerate(groups_per_window)]


def run(*groups_per_window, cfg=TrackingConfig()):
    s = snaps(*groups_per_window)
    return track(covers_for(s, groups_per_window), s, cfg)


def kinds(events):
    return sorted(e.event.value for e in events)


def test_config_validation():
    with pytest.raises(ConfigError):
        TrackingConfig(alpha=0)
    with pytest.raises(ConfigError):
        TrackingConfig(beta=101)
    with pytest.raises(ConfigError):
        TrackingConfig(importance="pagerank")


def test_event_order_and_ordinals():
    assert [e.value for e in EventType] == ["forming", "dissolving", "shrinking", "growing", "continuing", "splitting", "merging"]
    assert EventType.FORMING.ordinal == 1 and EventType.MERGING.ordinal == 7


def test_decision_rules():
    cfg = TrackingConfig()
    assert classify_pair(80, 80, 5, 5, 1, 1, cfg) is EventType.CONTINUING
    assert classify_pair(80, 80, 6, 5, 1, 1, cfg) is EventType.SHRINKING
    assert classify_pair(80, 80, 5, 6, 1, 1, cfg) is EventType.GROWING
    assert classify_pair(20, 80, 8, 4, 1, 1, cfg) is EventType.SHRINKING
    assert classify_pair(20, 80, 8, 4, 2, 1, cfg) is EventType.SPLITTING
    assert classify_pair(80, 20, 4, 8, 1, 1, cfg) is EventType.GROWING
    assert classify_pair(80, 20, 4, 8, 1, 2, cfg) is EventType.MERGING
    assert classify_pair(20, 20, 4, 4, 1, 1, cfg) is None


def test_continuing_growing_shrinking():
    assert kinds(run([range(5)], [range(5)])) == ["continuing"]
    assert kinds(run([range(5)], [range(7)])) == ["growing"]
    assert kinds(run([range(7)], [range(5)])) == ["shrinking"]


def test_split_merge_form_dissolve():
    assert kinds(run([range(8)], [range(4), range(4, 8)])) == ["splitting", "splitting"]
    assert kinds(run([range(4), range(4, 8)], [range(8)])) == ["merging", "merging"]
    assert kinds(run([range(4)], [range(10, 14)])) == ["dissolving", "forming"]


def test_non_consecutive_windows_rejected():
    s = snaps([range(4)], [range(4)], [range(4)])
    c = covers_for(s, [[range(4)], [range(4)], [range(4)]])
    with pytest.raises(DataError):
        match_windows(c[0], c[2], s)


def test_inclusion_formula_degree():
    g = SnapshotGraph.from_edges([(0, 1), (1, 2), (2, 3)])
    g1 = Community(0, 0, frozenset({0, 1, 2, 3}))
    g2 = Community(1, 0, frozenset({1, 2, 9}))
    # internal degrees 1,2,2,1; common {1,2} carries 4 of 6
    assert inclusion(g1, g2, g, "degree") == pytest.approx(100 * 0.5 * 4 / 6)
    assert inclusion(g1, g2, g, "uniform") == pytest.approx(25.0)
    assert inclusion(g1, g2, g, "betweenness") == pytest.approx(100 * 0.5 * 1.0)


@settings(max_examples=100, deadline=None)
@given(st.sets(st.integers(0, 30), min_size=1), st.sets(st.integers(0, 30), min_size=1))
def test_uniform_inclusion_closed_form(a, b):
    g1, g2 = Community(0, 0, frozenset(a)), Community(1, 0, frozenset(b))
    val = inclusion_from_importance(g1, g2, {v: 1.0 for v in a})
    assert 0.0 <= val <= 100.0
    assert val == pytest.approx(100 * (len(a & b) / len(a)) ** 2, abs=1e-12)


def test_events_roundtrip_and_histogram(tmp_path):
    events = run([range(8), range(20, 24)], [range(4), range(4, 8), range(30, 33)])
    write_events(events, tmp_path / "e.csv")
    assert read_events(tmp_path / "e.csv") == events
    h = event_histogram(events)
    assert h["splitting"] == 2 and h["dissolving"] == 1 and h["forming"] == 1 and h["total"] == 4
    write_histogram([(50, 50, h)], tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text().splitlines()[1] == "50,50,1,1,0,0,0,2,0,4"


def test_missing_snapshot_for_importance():
    s = snaps([range(5)], [range(5)])
    c = covers_for(s, [[range(5)], [range(5)]])
    with pytest.raises(DataError):
        match_windows(c[0], c[1], {}, TrackingConfig(importance="degree"))
    assert len(match_windows(c[0], c[1], {}, TrackingConfig(importance="uniform"))) == 1
