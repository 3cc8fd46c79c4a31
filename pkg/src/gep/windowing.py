"""Slicing a stream into disjoint, overlapping or increasing time windows."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DataError
from .ingest import TemporalEventStream

WINDOW_TYPES = ("disjoint", "overlapping", "increasing")
DIVISIONS = ("timestamp", "relations-count", "arbitrary")


@dataclass(frozen=True)
class WindowSpec:
    window_type: str = "disjoint"
    division: str = "timestamp"
    size: int = 1
    offset: int | None = None
    boundaries: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.window_type not in WINDOW_TYPES:
            raise ConfigError(f"unknown window type {self.window_type!r}")
        if self.division not in DIVISIONS:
            raise ConfigError(f"unknown window division {self.division!r}")
        if self.division == "arbitrary":
            b = self.boundaries
            if not b or len(b) < 2:
                raise ConfigError("arbitrary division needs at least two boundaries")
            if any(y <= x for x, y in zip(b, b[1:])):
                raise ConfigError("window boundaries must be strictly increasing")
            if self.window_type == "overlapping":
                raise ConfigError("arbitrary division supports disjoint and increasing windows only")
            object.__setattr__(self, "boundaries", tuple(int(x) for x in b))
            return
        if self.size <= 0:
            raise ConfigError("window size must be positive")
        if self.window_type == "overlapping":
            if self.offset is None or not 0 < self.offset < self.size:
                raise ConfigError(f"overlapping windows need 0 < offset < size (size={self.size}, offset={self.offset})")
        if self.window_type == "increasing" and self.division != "timestamp":
            raise ConfigError("increasing windows support timestamp division only")

    @property
    def step(self) -> int:
        return self.offset if self.window_type == "overlapping" else self.size

    def to_dict(self) -> dict:
        return {
            "window_type": self.window_type,
            "division": self.division,
            "size": self.size,
            "offset": self.offset,
            "boundaries": list(self.boundaries) if self.boundaries else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WindowSpec":
        b = d.get("boundaries")
        return cls(
            window_type=d.get("window_type", "disjoint"),
            division=d.get("division", "timestamp"),
            size=int(d.get("size", 1)),
            offset=None if d.get("offset") is None else int(d["offset"]),
            boundaries=tuple(b) if b else None,
        )


@dataclass(frozen=True)
class TimeWindow:
    """Half-open time interval ``[start, end)`` plus its record index range."""

    index: int
    start: int
    end: int
    lo: int
    hi: int

    @property
    def record_count(self) -> int:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        return {"index": self.index, "start": self.start, "end": self.end, "record_count": self.record_count}


def _time_windows(stream: TemporalEventStream, spec: WindowSpec) -> list[tuple[int, int]]:
    t_min, t_max = stream.span
    end = t_max + 1
    if spec.window_type == "increasing":
        count = math.ceil((end - t_min) / spec.size)
        return [(t_min, t_min + k * spec.size) for k in range(1, count + 1)]
    out = []
    start = t_min
    while start < end:
        out.append((start, start + spec.size))
        if start + spec.size >= end:
            break
        start += spec.step
    return out


def make_windows(stream: TemporalEventStream, spec: WindowSpec) -> list[TimeWindow]:
    """Cut ``stream`` into windows according to ``spec``.

    Interior empty windows are kept so disjoint windows still partition the
    span; a trailing partial window is dropped only if it holds no records.
    """
    n = stream.record_count
    windows: list[TimeWindow] = []
    if spec.division == "relations-count":
        ts = stream.timestamps
        lo = 0
        while lo < n:
            hi = min(lo + spec.size, n)
            windows.append(TimeWindow(len(windows), int(ts[lo]), int(ts[hi - 1]) + 1, lo, hi))
            if lo + spec.size >= n:
                break
            lo += spec.step
        return windows

    if spec.division == "arbitrary":
        b = spec.boundaries
        if spec.window_type == "increasing":
            bounds = [(b[0], e) for e in b[1:]]
        else:
            bounds = list(zip(b, b[1:]))
    else:
        bounds = _time_windows(stream, spec)

    for i, (start, end) in enumerate(bounds):
        lo, hi = stream.index_range(start, end)
        last = i == len(bounds) - 1
        if last and hi == lo and windows:
            continue
        windows.append(TimeWindow(len(windows), int(start), int(end), lo, hi))
    if not windows or all(w.record_count == 0 for w in windows):
        raise DataError("windowing produced no non-empty windows")
    return windows


def offset_fraction(spec: WindowSpec) -> float:
    if spec.window_type != "overlapping":
        raise ConfigError("offset fraction is defined for overlapping windows only")
    return spec.offset / spec.size


def offset_in_guideline(spec: WindowSpec, lo: float = 0.3, hi: float = 0.5) -> bool:
    return lo <= offset_fraction(spec) <= hi


def write_windows(windows: list[TimeWindow], path: str | Path) -> None:
    Path(path).write_text(json.dumps([w.to_dict() for w in windows], indent=1))
