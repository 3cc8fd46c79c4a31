"""Synthetic test beds.

``planted_stream`` simulates groups that continue, grow, shrink, split, merge
and dissolve on a schedule, with a structural precursor in the window just
before each event:

    continuing  medium internal density
    growing     dense core plus single edges to the future recruits
    shrinking   dense core plus a sparsely attached periphery that leaves
    splitting   two dense blocks joined by a few cross edges
    merging     a matching of edges to the merge partner
    dissolving  sparse, with no outside contact ("silent")

Every group is laid out on a ring where each member touches the next two,
so each member sits in a triangle and clique percolation with k=3 recovers
the whole group. ``signature_noise`` swaps the precursor for a random other
one, and ``drift_at`` permutes which precursor announces which event from
that window on.

``churn_stream`` produces interactions that never close a triangle inside a
window, so no community (and hence no chain) can be found.

``planted_feature_dataset`` is a tabular set for feature selection: a few
informative columns decide the label, the rest are noise.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .ingest import InteractionRecord, TemporalEventStream
from .learn.dataset import MLDataset

EVENTS = ("continuing", "growing", "shrinking", "splitting", "merging", "dissolving")
DEFAULT_PROBS = (0.5, 0.14, 0.1, 0.06, 0.12, 0.08)  # continuing dominates, splitting is rare
# under drift, the precursor of event e becomes the one listed here
DRIFT_MAP = {
    "continuing": "dissolving",
    "dissolving": "continuing",
    "growing": "shrinking",
    "shrinking": "growing",
    "splitting": "merging",
    "merging": "splitting",
}


@dataclass(frozen=True)
class SynthConfig:
    windows: int = 40
    window_size: int = 100
    groups: int = 10
    min_size: int = 5
    max_size: int = 14
    background: int = 80
    noise_edges: int = 40
    signature_noise: float = 0.15
    event_probs: tuple[float, ...] = DEFAULT_PROBS
    drift_at: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.windows < 2:
            raise ConfigError("need at least 2 windows")
        if self.window_size < 1 or self.groups < 1:
            raise ConfigError("window_size and groups must be positive")
        if not 4 <= self.min_size <= self.max_size:
            raise ConfigError("need 4 <= min_size <= max_size")
        if len(self.event_probs) != len(EVENTS) or min(self.event_probs) < 0 or sum(self.event_probs) <= 0:
            raise ConfigError(f"event_probs needs {len(EVENTS)} non-negative weights")
        if not 0 <= self.signature_noise <= 1:
            raise ConfigError("signature_noise must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["event_probs"] = list(self.event_probs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        if "event_probs" in d:
            d["event_probs"] = tuple(d["event_probs"])
        return cls(**d)


@dataclass
class _Group:
    uid: int
    members: list[int]
    event: str = "continuing"
    partner: int | None = None
    look: str = "continuing"  # precursor actually drawn
    parts: tuple[list[int], list[int]] | None = None  # split halves / (kept, leaving)
    recruits: list[int] = field(default_factory=list)


@dataclass
class PlantedStream:
    stream: TemporalEventStream
    schedule: list[tuple[int, int, str]]  # (window, group uid, planted event into the next window)
    config: SynthConfig

    def planted_counts(self) -> dict[str, int]:
        out = dict.fromkeys(EVENTS, 0)
        for w, _, ev in self.schedule:
            if w < self.config.windows - 1:
                out[ev] += 1
        return out


class _Simulator:
    def __init__(self, cfg: SynthConfig) -> None:
        self.cfg = cfg
        self.rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, 7])))
        self.next_node = 0
        self.next_uid = 0
        self.background: list[int] = self._fresh(cfg.background)
        self.cooldown: list[int] = []
        self.records: list[tuple[int, int, int]] = []
        self.schedule: list[tuple[int, int, str]] = []

    def _fresh(self, n: int) -> list[int]:
        out = list(range(self.next_node, self.next_node + n))
        self.next_node += n
        return out

    def _take_background(self, n: int) -> list[int]:
        if len(self.background) < n + self.cfg.background // 2:
            self.background += self._fresh(n + self.cfg.background // 2)
        pick = self.rng.choice(len(self.background), size=n, replace=False)
        chosen = [self.background[i] for i in sorted(pick)]
        taken = set(chosen)
        self.background = [v for v in self.background if v not in taken]
        return chosen

    def _new_group(self, size: int) -> _Group:
        g = _Group(self.next_uid, self._take_background(size))
        self.next_uid += 1
        return g

    # scheduling -------------------------------------------------------

    def _feasible(self, g: _Group, ev: str) -> bool:
        n, cfg = len(g.members), self.cfg
        if ev == "splitting":
            return n >= 2 * cfg.min_size - 2 and n >= 8
        if ev == "shrinking":
            return n - max(2, int(round(0.4 * n))) >= cfg.min_size
        if ev == "growing":
            return n + 3 <= cfg.max_size
        return True

    def _assign(self, groups: list[_Group]) -> None:
        probs = np.asarray(self.cfg.event_probs, dtype=float)
        for g in groups:
            ok = np.array([self._feasible(g, e) for e in EVENTS])
            p = probs * ok
            g.event = EVENTS[int(self.rng.choice(len(EVENTS), p=p / p.sum()))]
            g.partner = None
        mergers = [g for g in groups if g.event == "merging"]
        self.rng.shuffle(mergers)
        for a, b in zip(mergers[::2], mergers[1::2]):
            a.partner, b.partner = b.uid, a.uid
        for g in mergers:
            if g.partner is None:
                g.event = "continuing"

    def _choose_look(self, g: _Group, w: int) -> str:
        look = g.event
        if self.cfg.drift_at is not None and w >= self.cfg.drift_at:
            look = DRIFT_MAP[look]
        if self.rng.random() < self.cfg.signature_noise:
            look = EVENTS[int(self.rng.integers(len(EVENTS)))]
        if not self._feasible(g, look) and look in ("splitting", "shrinking", "growing"):
            look = "continuing"
        return look

    # interactions -----------------------------------------------------

    def _emit(self, w: int, u: int, v: int) -> None:
        t0 = w * self.cfg.window_size
        for _ in range(1 + int(self.rng.poisson(0.5))):
            self.records.append((u, v, t0 + int(self.rng.integers(self.cfg.window_size))))

    def _ring(self, w: int, members: list[int], p: float) -> None:
        n = len(members)
        edges = set()
        for i in range(n):
            for step in (1, 2):
                if n > step:
                    a, b = members[i], members[(i + step) % n]
                    if a != b:
                        edges.add((min(a, b), max(a, b)))
        for i in range(n):
            for j in range(i + 1, n):
                if self.rng.random() < p:
                    edges.add((min(members[i], members[j]), max(members[i], members[j])))
        for a, b in sorted(edges):
            self._emit(w, a, b)

    def _draw_group(self, w: int, g: _Group, by_uid: dict[int, _Group]) -> None:
        m = list(g.members)
        self.rng.shuffle(m)
        look = g.look
        if look == "splitting":
            h = len(m) // 2
            a, b = m[:h], m[h:]
            self._ring(w, a, 0.9)
            self._ring(w, b, 0.9)
            for x in a:
                for y in b:
                    if self.rng.random() < 0.3:
                        self._emit(w, x, y)
            g.parts = (a, b)
        elif look == "shrinking":
            k = max(2, int(round(0.4 * len(m))))
            core, edge = m[k:], m[:k]
            self._ring(w, core, 0.8)
            # periphery: each leaver closes one triangle with two adjacent core members
            for i, x in enumerate(edge):
                c1, c2 = core[i % len(core)], core[(i + 1) % len(core)]
                self._emit(w, x, c1)
                self._emit(w, x, c2)
            g.parts = (core, edge)
        elif look == "growing":
            self._ring(w, m, 0.9)
            n_new = int(self.rng.integers(3, max(4, min(len(m), self.cfg.max_size - len(m)) + 1)))
            g.recruits = self._take_background(n_new)
            for r in g.recruits:
                self._emit(w, r, m[int(self.rng.integers(len(m)))])
        elif look == "merging":
            self._ring(w, m, 0.3)
            other = by_uid.get(g.partner) if g.partner is not None and g.event == "merging" else None
            if other is None:
                cand = [o for o in by_uid.values() if o.uid != g.uid]
                other = cand[int(self.rng.integers(len(cand)))] if cand else None
            if other is not None and (g.partner != other.uid or g.uid < other.uid):
                om = list(other.members)
                self.rng.shuffle(om)
                for x, y in zip(m, om):
                    self._emit(w, x, y)
        elif look == "dissolving":
            self._ring(w, m, 0.1)
        else:
            self._ring(w, m, 0.5)

    def _noise(self, w: int, groups: list[_Group], silent: set[int]) -> None:
        pool = list(self.background) + [v for g in groups for v in g.members if v not in silent]
        if len(pool) < 2:
            return
        for _ in range(self.cfg.noise_edges):
            u, v = self.rng.choice(len(pool), size=2, replace=False)
            self._emit(w, pool[int(u)], pool[int(v)])

    # transitions ------------------------------------------------------

    def _advance(self, groups: list[_Group]) -> list[_Group]:
        out: list[_Group] = []
        released: list[int] = []
        by_uid = {g.uid: g for g in groups}
        merged: set[int] = set()
        for g in groups:
            ev = g.event
            if ev == "continuing":
                out.append(_Group(g.uid, list(g.members)))
            elif ev == "growing":
                recruits = g.recruits or self._take_background(3)
                out.append(_Group(g.uid, g.members + recruits))
                g.recruits = []
            elif ev == "shrinking":
                if g.parts is not None and g.look == "shrinking":
                    core, edge = g.parts
                else:
                    m = list(g.members)
                    self.rng.shuffle(m)
                    k = max(2, int(round(0.4 * len(m))))
                    core, edge = m[k:], m[:k]
                out.append(_Group(g.uid, list(core)))
                released += edge
            elif ev == "splitting":
                if g.parts is not None and g.look == "splitting":
                    a, b = g.parts
                else:
                    m = list(g.members)
                    self.rng.shuffle(m)
                    a, b = m[: len(m) // 2], m[len(m) // 2 :]
                out.append(_Group(g.uid, list(a)))
                out.append(_Group(self.next_uid, list(b)))
                self.next_uid += 1
            elif ev == "merging":
                if g.uid in merged:
                    continue
                other = by_uid[g.partner]
                merged |= {g.uid, other.uid}
                out.append(_Group(g.uid, g.members + other.members))
            elif ev == "dissolving":
                released += g.members
            if g.recruits:  # recruits drawn for a misleading precursor stay loose
                self.background += g.recruits
                g.recruits = []
        self.background += self.cooldown
        self.cooldown = released
        return out

    def run(self) -> PlantedStream:
        cfg = self.cfg
        groups = [self._new_group(int(self.rng.integers(cfg.min_size, cfg.max_size - 2))) for _ in range(cfg.groups)]
        for w in range(cfg.windows):
            self._assign(groups)
            by_uid = {g.uid: g for g in groups}
            for g in groups:
                g.look = self._choose_look(g, w)
                g.parts = None
                self.schedule.append((w, g.uid, g.event))
            for g in groups:
                self._draw_group(w, g, by_uid)
            silent = {v for g in groups if g.look == "dissolving" for v in g.members}
            self._noise(w, groups, silent)
            groups = self._advance(groups)
            while len(groups) < cfg.groups:
                groups.append(self._new_group(int(self.rng.integers(cfg.min_size, cfg.max_size - 2))))
        recs = sorted(self.records, key=lambda r: (r[2], r[0], r[1]))
        stream = TemporalEventStream.from_records(InteractionRecord(f"n{u}", f"n{v}", t, 1.0) for u, v, t in recs)
        return PlantedStream(stream, self.schedule, cfg)


def planted_stream(cfg: SynthConfig = SynthConfig()) -> PlantedStream:
    return _Simulator(cfg).run()


def churn_stream(windows: int = 10, window_size: int = 100, nodes: int = 60, seed: int = 0) -> TemporalEventStream:
    """Random perfect matchings, one per window: no triangle, hence no community, ever forms."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 11])))
    recs = []
    for w in range(windows):
        perm = rng.permutation(nodes)
        for a, b in zip(perm[0::2], perm[1::2]):
            recs.append(InteractionRecord(f"c{a}", f"c{b}", w * window_size + int(rng.integers(window_size)), 1.0))
    recs.sort(key=lambda r: (r.timestamp, r.source, r.target))
    return TemporalEventStream.from_records(recs)


def planted_feature_dataset(
    n_rows: int = 400,
    n_features: int = 50,
    informative: tuple[int, ...] = (3, 11, 24, 37, 46),
    seed: int = 0,
) -> MLDataset:
    """Label ``pos`` when most informative columns are positive; other columns are pure noise."""
    if any(not 0 <= i < n_features for i in informative) or len(set(informative)) != len(informative):
        raise ConfigError("informative indices must be distinct and inside the feature range")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 13])))
    X = rng.normal(size=(n_rows, n_features))
    votes = (X[:, list(informative)] > 0).sum(axis=1)
    y = np.where(votes * 2 > len(informative), "pos", "neg").astype(object)
    cols = tuple(f"x{i:02d}" for i in range(n_features))
    return MLDataset(X, y, cols, provenance={"generator": "planted-features", "informative": list(informative), "seed": seed})
