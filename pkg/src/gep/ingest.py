"""Reading timestamped interaction streams.

A stream is a time-ordered list of ``source, target, timestamp[, weight]``
records. Node ids are opaque tokens; they are interned to dense integers in
order of first appearance and the original token is kept in ``stream.nodes``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class InteractionRecord:
    source: str
    target: str
    timestamp: int
    weight: float = 1.0


class TemporalEventStream:
    """Immutable, timestamp-sorted interaction stream.

    Records are stored column-wise: ``sources``/``targets`` hold interned node
    indices into ``nodes``.
    """

    def __init__(
        self,
        nodes: Sequence[str],
        sources: np.ndarray,
        targets: np.ndarray,
        timestamps: np.ndarray,
        weights: np.ndarray,
        directed: bool = False,
    ) -> None:
        if len(timestamps) == 0:
            raise DataError("empty stream")
        if np.any(np.diff(timestamps) < 0):
            raise DataError("stream records must be sorted by timestamp")
        if np.any(weights < 0):
            raise DataError("negative interaction weight")
        self.nodes = tuple(nodes)
        self.sources = np.asarray(sources, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.timestamps = np.asarray(timestamps, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=float)
        self.directed = directed
        for arr in (self.sources, self.targets, self.timestamps, self.weights):
            arr.setflags(write=False)

    @classmethod
    def from_records(cls, records: Iterable[InteractionRecord], directed: bool = False) -> "TemporalEventStream":
        records = sorted(records, key=lambda r: r.timestamp)
        index: dict[str, int] = {}
        src, dst, ts, w = [], [], [], []
        for r in records:
            src.append(index.setdefault(str(r.source), len(index)))
            dst.append(index.setdefault(str(r.target), len(index)))
            ts.append(int(r.timestamp))
            w.append(float(r.weight))
        return cls(list(index), np.array(src), np.array(dst), np.array(ts), np.array(w), directed=directed)

    @property
    def record_count(self) -> int:
        return len(self.timestamps)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def span(self) -> tuple[int, int]:
        return int(self.timestamps[0]), int(self.timestamps[-1])

    def __len__(self) -> int:
        return self.record_count

    def records(self, lo: int = 0, hi: int | None = None) -> list[InteractionRecord]:
        hi = self.record_count if hi is None else hi
        return [
            InteractionRecord(self.nodes[s], self.nodes[t], int(ts), float(w))
            for s, t, ts, w in zip(self.sources[lo:hi], self.targets[lo:hi], self.timestamps[lo:hi], self.weights[lo:hi])
        ]

    def index_range(self, start: int, end: int) -> tuple[int, int]:
        """Record index range ``[lo, hi)`` of records with ``start <= t < end``."""
        lo = int(np.searchsorted(self.timestamps, start, side="left"))
        hi = int(np.searchsorted(self.timestamps, end, side="left"))
        return lo, hi


def _parse_timestamp(raw: str, line: int) -> int:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError:
        raise DataError(f"line {line}: timestamp {raw!r} is neither an integer nor ISO-8601") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _looks_like_header(row: list[str]) -> bool:
    if len(row) < 3:
        return False
    try:
        _parse_timestamp(row[2], 0)
    except DataError:
        return True
    return False


def parse_stream(
    path: str | Path,
    format: str = "csv",
    delimiter: str | None = None,
    header: bool | None = None,
    self_loops: str = "drop",
    directed: bool = False,
) -> TemporalEventStream:
    """Parse a ``source,target,timestamp[,weight]`` file.

    ``header=None`` sniffs the first row: it is treated as a header when its
    third column is not a timestamp. ``self_loops`` is ``"drop"`` or ``"keep"``.
    Duplicate rows are kept, since repeated interactions are meaningful.
    """
    if format not in ("csv", "tsv"):
        raise ConfigError(f"unknown stream format {format!r}")
    if self_loops not in ("drop", "keep"):
        raise ConfigError(f"unknown self-loop policy {self_loops!r}")
    if delimiter is None:
        delimiter = "\t" if format == "tsv" else ","
    path = Path(path)
    if not path.exists():
        raise DataError(f"stream file not found: {path}")
    if not path.is_file():
        raise DataError(f"stream path is not a file: {path}")

    records: list[InteractionRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and (header or (header is None and _looks_like_header(row))):
                continue
            if len(row) < 3:
                raise DataError(f"line {lineno}: expected at least 3 columns (source, target, timestamp), got {len(row)}")
            source, target = row[0].strip(), row[1].strip()
            ts = _parse_timestamp(row[2], lineno)
            weight = 1.0
            if len(row) > 3 and row[3].strip():
                try:
                    weight = float(row[3])
                except ValueError:
                    raise DataError(f"line {lineno}: weight {row[3]!r} is not a number") from None
                if weight < 0:
                    raise DataError(f"line {lineno}: negative weight {weight}")
            if source == target and self_loops == "drop":
                continue
            records.append(InteractionRecord(source, target, ts, weight))
    if not records:
        raise DataError(f"empty stream: {path}")
    return TemporalEventStream.from_records(records, directed=directed)


def write_stream(stream: TemporalEventStream, path: str | Path, delimiter: str = ",") -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(["source", "target", "timestamp", "weight"])
        for r in stream.records():
            writer.writerow([r.source, r.target, r.timestamp, repr(r.weight)])


def load_manifest(path: str | Path) -> TemporalEventStream:
    """Load a dataset manifest (JSON) and parse the stream it points to.

    Keys: ``path`` (relative to the manifest), ``format``, ``directed``,
    ``self_loops``, and optionally ``header`` and ``delimiter``.
    """
    path = Path(path)
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    if "path" not in spec:
        raise ConfigError(f"manifest {path} has no 'path' key")
    data_path = Path(spec["path"])
    if not data_path.is_absolute():
        data_path = path.parent / data_path
    return parse_stream(
        data_path,
        format=spec.get("format", "csv"),
        delimiter=spec.get("delimiter"),
        header=spec.get("header"),
        self_loops=spec.get("self_loops", "drop"),
        directed=bool(spec.get("directed", False)),
    )


@dataclass(frozen=True)
class StreamSummary:
    nodes: int
    edges: int
    records: int
    span: tuple[int, int]
    avg_degree: float
    directed: bool


def stream_summary(stream: TemporalEventStream) -> StreamSummary:
    """Dataset profile: nodes, distinct edges, records, span, average degree."""
    src, dst = stream.sources, stream.targets
    keep = src != dst
    src, dst = src[keep], dst[keep]
    if stream.directed:
        pairs = {(int(a), int(b)) for a, b in zip(src, dst)}
        avg = len(pairs) / stream.node_count
    else:
        pairs = {(min(int(a), int(b)), max(int(a), int(b))) for a, b in zip(src, dst)}
        avg = 2 * len(pairs) / stream.node_count
    return StreamSummary(stream.node_count, len(pairs), stream.record_count, stream.span, avg, stream.directed)
