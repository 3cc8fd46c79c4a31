"""Matching communities across consecutive windows and typing the transitions.

Two communities are compared with the inclusion measure

    I(G1, G2) = 100 * |G1 & G2| / |G1| * sum_{x in G1 & G2} NI(x) / sum_{x in G1} NI(x)

where NI is a member-importance score computed on G1's induced subgraph.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .community import Community, CommunityCover, CommunityId
from .errors import ConfigError, DataError
from .snapshot import SnapshotGraph, induced_subgraph

IMPORTANCE_MEASURES = ("uniform", "degree", "betweenness")


class EventType(str, enum.Enum):
    FORMING = "forming"
    DISSOLVING = "dissolving"
    SHRINKING = "shrinking"
    GROWING = "growing"
    CONTINUING = "continuing"
    SPLITTING = "splitting"
    MERGING = "merging"

    @property
    def ordinal(self) -> int:
        """1-based position in the histogram column order; 0 is reserved for unknown."""
        return list(EventType).index(self) + 1

    def __str__(self) -> str:
        return self.value


# Histogram column order (forming, dissolving, shrinking, growing, continuing, splitting, merging)
HISTOGRAM_ORDER = tuple(EventType)

# The six events that can follow an existing community state
LABELS = ("continuing", "dissolving", "growing", "merging", "shrinking", "splitting")


@dataclass(frozen=True)
class TrackingConfig:
    alpha: float = 50.0
    beta: float = 50.0
    importance: str = "degree"

    def __post_init__(self) -> None:
        if not (0 < self.alpha <= 100 and 0 < self.beta <= 100):
            raise ConfigError(f"alpha and beta must lie in (0, 100], got {self.alpha}, {self.beta}")
        if self.importance not in IMPORTANCE_MEASURES:
            raise ConfigError(f"unknown importance measure {self.importance!r}")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "importance": self.importance}

    @classmethod
    def from_dict(cls, d: dict) -> "TrackingConfig":
        return cls(float(d.get("alpha", 50.0)), float(d.get("beta", 50.0)), d.get("importance", "degree"))


@dataclass(frozen=True)
class EvolutionEvent:
    source: CommunityId | None
    target: CommunityId | None
    event: EventType
    inclusion_fwd: float = 0.0
    inclusion_bwd: float = 0.0

    def sort_key(self) -> tuple:
        return (self.source or (-1, -1), self.target or (-1, -1), self.event.ordinal)


def member_importance(community: Community, snapshot: SnapshotGraph, measure: str) -> dict[int, float]:
    """Importance of each member inside the community's own subgraph."""
    if measure == "uniform":
        return {v: 1.0 for v in community.members}
    sub = induced_subgraph(snapshot, community.members)
    if measure == "degree":
        vals = sub.out_degree() + sub.in_degree() if sub.directed else sub.out_degree()
    elif measure == "betweenness":
        vals = sub.path_stats.betweenness
    else:
        raise ConfigError(f"unknown importance measure {measure!r}")
    return {v: float(vals[i]) for i, v in enumerate(sub.nodes)}


def inclusion_from_importance(g1: Community, g2: Community, importance: Mapping[int, float]) -> float:
    if not g1.members or not g2.members:
        raise DataError("inclusion is undefined for empty communities")
    common = g1.members & g2.members
    quantity = len(common) / len(g1.members)
    total = sum(importance[v] for v in g1.members)
    quality = sum(importance[v] for v in common) / total if total > 0 else quantity
    return 100.0 * quantity * quality


def inclusion(g1: Community, g2: Community, snapshot: SnapshotGraph, measure: str = "degree") -> float:
    """Inclusion of ``g1`` in ``g2``; ``snapshot`` is the graph of g1's window."""
    if not g1.members or not g2.members:
        raise DataError("inclusion is undefined for empty communities")
    return inclusion_from_importance(g1, g2, member_importance(g1, snapshot, measure))


def classify_pair(
    fwd: float,
    bwd: float,
    size1: int,
    size2: int,
    successors: int,
    predecessors: int,
    cfg: TrackingConfig,
) -> EventType | None:
    """Event type for one overlapping pair, or None if it matches nothing.

    ``successors`` counts qualifying partners of G1 in the next window and
    ``predecessors`` those of G2 in the previous one; a pair qualifies when
    either inclusion meets its threshold. Rules are tried in this order:
    continuing, shrinking, growing, splitting, merging.
    """
    f_ok, b_ok = fwd >= cfg.alpha, bwd >= cfg.beta
    if f_ok and b_ok:
        if size1 == size2:
            return EventType.CONTINUING
        return EventType.SHRINKING if size1 > size2 else EventType.GROWING
    if b_ok and size1 >= size2:
        return EventType.SHRINKING if successors == 1 else EventType.SPLITTING
    if f_ok and size1 <= size2:
        return EventType.GROWING if predecessors == 1 else EventType.MERGING
    return None


def match_windows(
    cover_a: CommunityCover,
    cover_b: CommunityCover,
    snapshots: Mapping[int, SnapshotGraph],
    cfg: TrackingConfig = TrackingConfig(),
    importance_cache: dict | None = None,
) -> list[EvolutionEvent]:
    """All events between window ``i`` and window ``i + 1``.

    ``importance_cache`` may be shared across calls that differ only in the
    thresholds; it is keyed by importance measure and community id.
    """
    if cover_b.window != cover_a.window + 1:
        raise DataError(f"windows {cover_a.window} and {cover_b.window} are not consecutive")
    comms_a, comms_b = list(cover_a.communities), list(cover_b.communities)
    nodes_b = set().union(*(c.members for c in comms_b)) if comms_b else set()
    nodes_a = set().union(*(c.members for c in comms_a)) if comms_a else set()

    events: list[EvolutionEvent] = []
    for g1 in comms_a:
        if not g1.members & nodes_b:
            events.append(EvolutionEvent(g1.id, None, EventType.DISSOLVING))
    for g2 in comms_b:
        if not g2.members & nodes_a:
            events.append(EvolutionEvent(None, g2.id, EventType.FORMING))

    cache = {} if importance_cache is None else importance_cache

    def imp(c: Community) -> dict[int, float]:
        key = (cfg.importance, c.id)
        if key not in cache:
            if cfg.importance == "uniform":
                cache[key] = {v: 1.0 for v in c.members}
            else:
                if c.window not in snapshots:
                    raise DataError(f"no snapshot for window {c.window}")
                cache[key] = member_importance(c, snapshots[c.window], cfg.importance)
        return cache[key]

    pairs = []
    for g1 in comms_a:
        for g2 in comms_b:
            if g1.members & g2.members:
                fwd = inclusion_from_importance(g1, g2, imp(g1))
                bwd = inclusion_from_importance(g2, g1, imp(g2))
                pairs.append((g1, g2, fwd, bwd))

    succ: dict[CommunityId, int] = {}
    pred: dict[CommunityId, int] = {}
    for g1, g2, fwd, bwd in pairs:
        if fwd >= cfg.alpha or bwd >= cfg.beta:
            succ[g1.id] = succ.get(g1.id, 0) + 1
            pred[g2.id] = pred.get(g2.id, 0) + 1

    for g1, g2, fwd, bwd in pairs:
        ev = classify_pair(fwd, bwd, g1.size, g2.size, succ.get(g1.id, 0), pred.get(g2.id, 0), cfg)
        if ev is not None:
            events.append(EvolutionEvent(g1.id, g2.id, ev, fwd, bwd))
    return sorted(events, key=EvolutionEvent.sort_key)


def track(
    covers: Sequence[CommunityCover],
    snapshots: Mapping[int, SnapshotGraph],
    cfg: TrackingConfig = TrackingConfig(),
    importance_cache: dict | None = None,
) -> list[EvolutionEvent]:
    """Run :func:`match_windows` over every consecutive pair of covers."""
    events: list[EvolutionEvent] = []
    for a, b in zip(covers, covers[1:]):
        events.extend(match_windows(a, b, snapshots, cfg, importance_cache))
    return events


def event_histogram(events: Iterable[EvolutionEvent]) -> dict[str, int]:
    counts = {e.value: 0 for e in HISTOGRAM_ORDER}
    for ev in events:
        counts[ev.event.value] += 1
    counts["total"] = sum(counts.values())
    return counts


def _fmt_id(cid: CommunityId | None) -> tuple[str, str]:
    return ("", "") if cid is None else (str(cid[0]), str(cid[1]))


def write_events(events: Iterable[EvolutionEvent], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window_from", "group_from", "window_to", "group_to", "event", "inclusion_fwd", "inclusion_bwd"])
        for ev in events:
            w.writerow([*_fmt_id(ev.source), *_fmt_id(ev.target), ev.event.value, repr(ev.inclusion_fwd), repr(ev.inclusion_bwd)])


def read_events(path: str | Path) -> list[EvolutionEvent]:
    def cid(win: str, grp: str) -> CommunityId | None:
        return None if win == "" else (int(win), int(grp))

    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                EvolutionEvent(
                    cid(row["window_from"], row["group_from"]),
                    cid(row["window_to"], row["group_to"]),
                    EventType(row["event"]),
                    float(row["inclusion_fwd"]),
                    float(row["inclusion_bwd"]),
                )
            )
    return out


def write_histogram(rows: Iterable[tuple[float, float, dict[str, int]]], path: str | Path) -> None:
    """One row per (alpha, beta) setting."""
    cols = [e.value for e in HISTOGRAM_ORDER] + ["total"]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "beta", *cols])
        for alpha, beta, hist in rows:
            w.writerow([alpha, beta, *(hist[c] for c in cols)])
