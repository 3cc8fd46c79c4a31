"""Evolution chains: L consecutive states of a community plus the next event."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .community import CommunityId
from .errors import ConfigError
from .tracking import EventType, EvolutionEvent

DEDUP_MODES = ("last-state", "full", "none")


@dataclass(frozen=True)
class EvolutionChain:
    """``states[-1]`` is the most recent state; ``label`` is what happened next.

    ``inclusions[k]`` is the (forward, backward) inclusion pair of the event
    that led into ``states[k]``; ``entry_event`` is that event's type for the
    first state (None when no tracked event led into it).
    """

    states: tuple[CommunityId, ...]
    transitions: tuple[EventType, ...]
    label: EventType
    inclusions: tuple[tuple[float, float], ...]
    entry_event: EventType | None = None

    @property
    def length(self) -> int:
        return len(self.states)

    @property
    def key(self) -> str:
        """Stable row id, e.g. ``3:1>4:0|merging``."""
        return ">".join(f"{w}:{j}" for w, j in self.states) + "|" + self.label.value

    def previous_event(self, k: int) -> EventType | None:
        return self.entry_event if k == 0 else self.transitions[k - 1]


class EventGraph:
    """Incoming/outgoing event index over community states."""

    def __init__(self, events: Iterable[EvolutionEvent]) -> None:
        self.outgoing: dict[CommunityId, list[EvolutionEvent]] = defaultdict(list)
        self.incoming: dict[CommunityId, list[EvolutionEvent]] = defaultdict(list)
        for ev in events:
            if ev.source is not None:
                self.outgoing[ev.source].append(ev)
            if ev.target is not None:
                self.incoming[ev.target].append(ev)

    def entry(self, state: CommunityId) -> EvolutionEvent | None:
        """The strongest event into ``state`` (forming events included)."""
        inc = self.incoming.get(state)
        if not inc:
            return None
        return max(inc, key=lambda e: (e.inclusion_fwd + e.inclusion_bwd, tuple(-x for x in (e.source or (0, 0)))))

    def age(self, state: CommunityId, _memo: dict | None = None) -> int:
        """Length of the longest tracked lineage ending at ``state``."""
        memo = {} if _memo is None else _memo
        stack = [state]
        while stack:
            s = stack[-1]
            if s in memo:
                stack.pop()
                continue
            preds = [e.source for e in self.incoming.get(s, ()) if e.source is not None]
            missing = [p for p in preds if p not in memo]
            if missing:
                stack.extend(missing)
                continue
            memo[s] = 1 + max((memo[p] for p in preds), default=-1)
            stack.pop()
        return memo[state]


def build_chains(events: Sequence[EvolutionEvent], length: int) -> list[EvolutionChain]:
    """Every path of ``length`` consecutive states whose last state has an
    outgoing event, one chain per distinct outgoing event type."""
    if length < 1:
        raise ConfigError(f"chain length must be >= 1, got {length}")
    graph = EventGraph(events)
    chains: list[EvolutionChain] = []
    for last in sorted(graph.outgoing):
        labels = sorted({e.event for e in graph.outgoing[last]}, key=lambda t: t.ordinal)
        # grow paths backwards: each item is a list of events, oldest first
        paths: list[list[EvolutionEvent]] = [[]]
        for _ in range(length - 1):
            grown = []
            for p in paths:
                head = p[0].source if p else last
                for e in sorted(graph.incoming.get(head, ()), key=EvolutionEvent.sort_key):
                    if e.source is not None:
                        grown.append([e, *p])
            paths = grown
        for p in paths:
            states = tuple([p[0].source, *(e.target for e in p)]) if p else (last,)
            entry = graph.entry(states[0])
            incl = [(entry.inclusion_fwd, entry.inclusion_bwd) if entry else (0.0, 0.0)]
            incl += [(e.inclusion_fwd, e.inclusion_bwd) for e in p]
            for lab in labels:
                chains.append(
                    EvolutionChain(
                        states,
                        tuple(e.event for e in p),
                        lab,
                        tuple(incl),
                        entry.event if entry else None,
                    )
                )
    chains.sort(key=lambda c: (c.states, c.label.ordinal))
    return chains


def remove_duplicates(chains: Iterable[EvolutionChain], mode: str = "last-state") -> list[EvolutionChain]:
    """Keep one chain per (last state, label) pair.

    Ties go to the path through earlier windows, then to the
    lexicographically smallest state ids. ``mode="full"`` only drops exact
    repeats; ``mode="none"`` is a no-op.
    """
    if mode not in DEDUP_MODES:
        raise ConfigError(f"unknown dedup mode {mode!r}")
    chains = list(chains)
    if mode == "none":
        return chains
    if mode == "full":
        seen, out = set(), []
        for c in chains:
            if c not in seen:
                seen.add(c)
                out.append(c)
        return out
    best: dict[tuple, EvolutionChain] = {}
    for c in sorted(chains, key=lambda c: (tuple(w for w, _ in c.states), c.states)):
        best.setdefault((c.states[-1], c.label), c)
    keep = {id(c) for c in best.values()}
    return [c for c in chains if id(c) in keep]


def restrict_span(chains: Iterable[EvolutionChain], first: int, last: int) -> list[EvolutionChain]:
    """Chains whose every state lies in windows ``first..last`` (inclusive)."""
    if last < first:
        raise ConfigError(f"empty window range [{first}, {last}]")
    return [c for c in chains if all(first <= w <= last for w, _ in c.states)]


def write_chains(chains: Iterable[EvolutionChain], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["chain", "states", "transitions", "label", "inclusions", "entry_event"])
        for c in chains:
            w.writerow(
                [
                    c.key,
                    ";".join(f"{a}:{b}" for a, b in c.states),
                    ";".join(t.value for t in c.transitions),
                    c.label.value,
                    ";".join(f"{repr(f)}:{repr(b)}" for f, b in c.inclusions),
                    c.entry_event.value if c.entry_event else "",
                ]
            )


def read_chains(path: str | Path) -> list[EvolutionChain]:
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            states = tuple(tuple(int(x) for x in s.split(":")) for s in row["states"].split(";"))
            trans = tuple(EventType(t) for t in row["transitions"].split(";") if t)
            incl = tuple(tuple(float(x) for x in s.split(":")) for s in row["inclusions"].split(";"))
            entry = EventType(row["entry_event"]) if row["entry_event"] else None
            out.append(EvolutionChain(states, trans, EventType(row["label"]), incl, entry))
    return out
