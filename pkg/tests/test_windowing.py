from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gep.errors import ConfigError
from gep.ingest import InteractionRecord, TemporalEventStream
from gep.windowing import WindowSpec, make_windows, offset_fraction, offset_in_guideline


def stream_at(times):
    return TemporalEventStream.from_records([InteractionRecord(f"n{i % 5}", f"n{(i + 1) % 5}", t) for i, t in enumerate(times)])


def test_disjoint_partition_keeps_interior_gaps():
    s = stream_at([0, 1, 2, 25, 26])
    ws = make_windows(s, WindowSpec(size=10))
    assert [(w.start, w.end, w.record_count) for w in ws] == [(0, 10, 3), (10, 20, 0), (20, 30, 2)]


def test_overlapping_windows():
    s = stream_at(range(0, 30))
    ws = make_windows(s, WindowSpec("overlapping", size=10, offset=5))
    assert [w.start for w in ws] == [0, 5, 10, 15, 20]
    assert all(w.record_count == 10 for w in ws)


def test_increasing_windows_share_start():
    s = stream_at(range(0, 25))
    ws = make_windows(s, WindowSpec("increasing", size=10))
    assert [(w.start, w.end) for w in ws] == [(0, 10), (0, 20), (0, 30)]
    assert [w.record_count for w in ws] == [10, 20, 25]


def test_relations_count_division():
    s = stream_at([1, 1, 1, 2, 3, 4, 5])
    ws = make_windows(s, WindowSpec(division="relations-count", size=3))
    assert [w.record_count for w in ws] == [3, 3, 1]


def test_arbitrary_boundaries():
    s = stream_at(range(10))
    ws = make_windows(s, WindowSpec(division="arbitrary", boundaries=(0, 3, 10)))
    assert [w.record_count for w in ws] == [3, 7]


@pytest.mark.parametrize(
    "kw",
    [
        dict(window_type="sliding"),
        dict(size=0),
        dict(window_type="overlapping", size=10, offset=10),
        dict(window_type="overlapping", size=10),
        dict(division="arbitrary", boundaries=(3, 1)),
        dict(window_type="increasing", division="relations-count", size=5),
    ],
)
def test_bad_specs(kw):
    with pytest.raises(ConfigError):
        WindowSpec(**kw)


def test_offset_guideline():
    spec = WindowSpec("overlapping", size=28, offset=14)
    assert offset_fraction(spec) == 0.5 and offset_in_guideline(spec)
    assert not offset_in_guideline(WindowSpec("overlapping", size=10, offset=8))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 500), min_size=1, max_size=80), st.integers(1, 60))
def test_disjoint_windows_cover_every_record_once(times, size):
    s = stream_at(sorted(times))
    ws = make_windows(s, WindowSpec(size=size))
    counts = np.zeros(s.record_count, dtype=int)
    for w in ws:
        counts[w.lo:w.hi] += 1
        assert w.end - w.start == size
    assert (counts == 1).all()
    assert all(b.start == a.end for a, b in zip(ws, ws[1:]))
