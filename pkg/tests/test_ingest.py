from __future__ import annotations

import json

import pytest

from gep.errors import ConfigError, DataError
from gep.ingest import InteractionRecord, TemporalEventStream, load_manifest, parse_stream, stream_summary, write_stream


def write(tmp_path, text, name="s.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_header_sniffed_and_ids_interned(tmp_path):
    s = parse_stream(write(tmp_path, "src,dst,time\nb,a,5\na,c,3\n"))
    assert s.record_count == 2
    assert s.nodes == ("a", "c", "b")
    assert s.timestamps.tolist() == [3, 5]


def test_iso_timestamps_and_weights(tmp_path):
    s = parse_stream(write(tmp_path, "a,b,1970-01-01T00:00:10Z,2.5\nb,c,1970-01-01T00:00:20,\n"))
    assert s.timestamps.tolist() == [10, 20]
    assert s.weights.tolist() == [2.5, 1.0]


def test_self_loops_dropped_by_default(tmp_path):
    p = write(tmp_path, "a,a,1\na,b,2\n")
    assert parse_stream(p).record_count == 1
    assert parse_stream(p, self_loops="keep").record_count == 2


@pytest.mark.parametrize(
    "text, msg",
    [
        ("a,b\n", "at least 3 columns"),
        ("a,b,1\nc,d,yesterday\n", "neither an integer"),
        ("a,b,1,-3\n", "negative weight"),
        ("a,b,1,heavy\n", "not a number"),
    ],
)
def test_malformed_rows(tmp_path, text, msg):
    with pytest.raises(DataError, match=msg):
        parse_stream(write(tmp_path, text))


def test_empty_and_missing(tmp_path):
    with pytest.raises(DataError):
        parse_stream(write(tmp_path, "source,target,timestamp\n"))
    with pytest.raises(DataError):
        parse_stream(tmp_path / "nope.csv")
    with pytest.raises(DataError, match="not a file"):
        parse_stream(tmp_path)
    with pytest.raises(ConfigError):
        parse_stream(write(tmp_path, "a,b,1\n"), format="xml")


def test_unsorted_stream_is_sorted_on_load(tmp_path):
    s = parse_stream(write(tmp_path, "a,b,9\nb,c,1\nc,a,4\n"))
    assert s.timestamps.tolist() == [1, 4, 9]


def test_constructor_rejects_unsorted():
    import numpy as np

    with pytest.raises(DataError):
        TemporalEventStream(["a", "b"], np.array([0, 1]), np.array([1, 0]), np.array([2, 1]), np.ones(2))


def test_write_roundtrip(tmp_path):
    recs = [InteractionRecord("x", "y", 1, 1.5), InteractionRecord("y", "z", 2, 1.0)]
    s = TemporalEventStream.from_records(recs)
    write_stream(s, tmp_path / "out.csv")
    back = parse_stream(tmp_path / "out.csv")
    assert back.records() == s.records()


def test_manifest(tmp_path):
    write(tmp_path, "a\tb\t1\nb\tc\t2\n", "data.tsv")
    (tmp_path / "m.json").write_text(json.dumps({"path": "data.tsv", "format": "tsv", "directed": True}))
    s = load_manifest(tmp_path / "m.json")
    assert s.directed and s.record_count == 2
    (tmp_path / "bad.json").write_text("{}")
    with pytest.raises(ConfigError):
        load_manifest(tmp_path / "bad.json")


def test_summary_counts_distinct_edges():
    recs = [InteractionRecord("a", "b", 1), InteractionRecord("b", "a", 2), InteractionRecord("a", "c", 3)]
    s = stream_summary(TemporalEventStream.from_records(recs))
    assert (s.nodes, s.edges, s.records) == (3, 2, 3)
    assert s.avg_degree == pytest.approx(4 / 3)
    d = stream_summary(TemporalEventStream.from_records(recs, directed=True))
    assert d.edges == 3
