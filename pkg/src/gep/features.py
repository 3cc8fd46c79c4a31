"""The 91-feature description of one community state.

Features come in four families: microscopic node measures aggregated over
the group (computed either on the group's own subgraph or on the whole
snapshot), mesoscopic group descriptors, macroscopic network descriptors,
and nine descriptors in the style of Ilhan et al.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .chains import EventGraph, EvolutionChain
from .community import Community, CommunityId
from .errors import DataError
from .learn.dataset import MLDataset
from .snapshot import NodeMeasureTable, SnapshotGraph, induced_subgraph
from .tracking import EvolutionEvent

CATALOG_VERSION = "1"

NODE_MEASURES = NodeMeasureTable.MEASURES
STATS = ("sum", "avg", "min", "max")

MESOSCOPIC = (
    "group_size",
    "group_edges",
    "group_density",
    "group_coefficient_global",
    "group_cohesion",
    "network_ratio_size",
    "network_ratio_edges",
    "network_ratio_density",
    "network_ratio_coefficient_global",
    "network_ratio_eccentricity",
    "neighborhood_in",
    "neighborhood_out",
    "neighborhood_all",
    "alpha",
    "beta",
    "previous_event",
    "group_component_count",
    "group_diameter",
    "group_avg_path_length",
)
MACROSCOPIC = (
    "network_size",
    "network_edges",
    "network_density",
    "network_reciprocity",
    "network_leadership",
    "network_coefficient_global",
    "network_component_count",
)
ILHAN = (
    "ilhan_nodes",
    "ilhan_edges",
    "ilhan_intra",
    "ilhan_inter",
    "ilhan_betweenness",
    "ilhan_degree",
    "ilhan_conductance",
    "ilhan_aging",
    "ilhan_activeness",
)


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    kind: str  # microscopic-local | microscopic-global | mesoscopic | macroscopic
    tag: str


def _build_catalog() -> tuple[FeatureDescriptor, ...]:
    out = []
    for scope, kind in (("group", "microscopic-local"), ("network", "microscopic-global")):
        for measure in NODE_MEASURES:
            for stat in STATS:
                out.append(FeatureDescriptor(f"{stat}_{scope}_{measure}", kind, f"{scope}:{measure}:{stat}"))
    out += [FeatureDescriptor(n, "mesoscopic", "group") for n in MESOSCOPIC]
    out += [FeatureDescriptor(n, "macroscopic", "network") for n in MACROSCOPIC]
    out += [FeatureDescriptor(n, "microscopic-local", "ilhan") for n in ILHAN]
    return tuple(out)


_CATALOG = _build_catalog()
FEATURE_NAMES = tuple(d.name for d in _CATALOG)
FEATURE_INDEX = {n: i for i, n in enumerate(FEATURE_NAMES)}
N_FEATURES = len(_CATALOG)
assert N_FEATURES == 91


def catalog() -> tuple[FeatureDescriptor, ...]:
    return _CATALOG


def feature_kind(name: str) -> str:
    """Type of a plain or state-suffixed feature name (``beta_T-2``)."""
    base = name.rsplit("_T-", 1)[0]
    return _CATALOG[FEATURE_INDEX[base]].kind


def write_catalog(path: str | Path) -> None:
    payload = {
        "version": CATALOG_VERSION,
        "features": [{"name": d.name, "type": d.kind, "tag": d.tag} for d in _CATALOG],
    }
    Path(path).write_text(json.dumps(payload, indent=1))


@dataclass(frozen=True)
class StateContext:
    """Tracking-derived inputs that depend on the chain, not only on the group."""

    alpha: float = 0.0
    beta: float = 0.0
    previous_event: int = 0
    age: int = 0
    windows_elapsed: int = 1


def _ratio(a: float, b: float) -> float:
    return a / b if b else 0.0


def _aggregate(values: np.ndarray) -> tuple[float, float, float, float]:
    if len(values) == 0:
        return 0.0, 0.0, 0.0, 0.0
    s = float(values.sum())
    return s, s / len(values), float(values.min()), float(values.max())


def structural_features(members: frozenset[int] | set[int], g: SnapshotGraph) -> dict[str, float]:
    """All features that depend only on the group and its snapshot."""
    members = frozenset(members)
    sub = induced_subgraph(g, members)
    out: dict[str, float] = {}

    gm, nm = sub.measures, g.measures
    idx = np.array([g.index[v] for v in sub.nodes], dtype=np.int64)
    for measure in NODE_MEASURES:
        for scope, vals in (("group", gm.column(measure)), ("network", nm.column(measure)[idx])):
            for stat, v in zip(STATS, _aggregate(vals)):
                out[f"{stat}_{scope}_{measure}"] = v

    size, n = len(members), g.n
    net, grp = g.network, sub.network
    b_in = b_out = 0
    sym_boundary = 0
    for u, v, _ in g.edges():
        iu, iv = u in members, v in members
        if iu != iv:
            if g.directed:
                if iu:
                    b_out += 1
                else:
                    b_in += 1
            else:
                b_in += 1
                b_out += 1
    for i in idx:
        sym_boundary += sum(1 for j in g.neighbors[i] if g.nodes[j] not in members)
    b_all = b_in + b_out if g.directed else b_in
    outside = n - size
    ext_pairs = size * outside * (2 if g.directed else 1)
    ext_density = _ratio(b_all, ext_pairs)

    avg_group_ecc = out["avg_group_eccentricity"]
    avg_net_ecc = float(nm.eccentricity.mean()) if n else 0.0
    ps = sub.path_stats
    out.update(
        group_size=float(size),
        group_edges=float(sub.edge_count),
        group_density=grp.density,
        group_coefficient_global=grp.clustering,
        group_cohesion=_ratio(grp.density, ext_density),
        network_ratio_size=_ratio(size, n),
        network_ratio_edges=_ratio(sub.edge_count, net.edge_count),
        network_ratio_density=_ratio(grp.density, net.density),
        network_ratio_coefficient_global=_ratio(grp.clustering, net.clustering),
        network_ratio_eccentricity=_ratio(avg_group_ecc, avg_net_ecc),
        neighborhood_in=float(b_in),
        neighborhood_out=float(b_out),
        neighborhood_all=float(b_all),
        group_component_count=float(grp.component_count),
        group_diameter=float(gm.eccentricity.max()) if size else 0.0,
        group_avg_path_length=_ratio(ps.distance_sum, ps.reachable_pairs),
        network_size=float(n),
        network_edges=float(net.edge_count),
        network_density=net.density,
        network_reciprocity=net.reciprocity,
        network_leadership=net.leadership,
        network_coefficient_global=net.clustering,
        network_component_count=float(net.component_count),
    )

    sym_internal = sum(len(nb) for nb in sub.neighbors) / 2
    sym_deg_net = np.array([len(g.neighbors[i]) for i in idx], dtype=float)
    vol_in = float(sym_deg_net.sum())
    vol_out = float(sum(len(nb) for nb in g.neighbors)) - vol_in
    bc_norm = (n - 1) * (n - 2) / 2
    internal_deg = np.array([len(nb) for nb in sub.neighbors], dtype=float)
    out.update(
        ilhan_nodes=float(size),
        ilhan_edges=float(sub.edge_count),
        ilhan_intra=_ratio(sym_internal, size * (size - 1) / 2),
        ilhan_inter=_ratio(sym_boundary, size * outside),
        ilhan_betweenness=_ratio(float(nm.betweenness[idx].mean()), bc_norm) if size else 0.0,
        ilhan_degree=_ratio(float(internal_deg.mean()), size - 1) if size else 0.0,
        ilhan_conductance=_ratio(sym_boundary, min(vol_in, vol_out)),
        ilhan_activeness=float(np.mean(internal_deg > 0)) if size else 0.0,
    )
    return out


def extract_state_features(
    community: Community,
    snapshot: SnapshotGraph | None,
    context: StateContext = StateContext(),
    structural: Mapping[str, float] | None = None,
) -> np.ndarray:
    """Feature vector (catalog order) of one community state."""
    if snapshot is None or snapshot.window_index != community.window:
        raise DataError(f"no snapshot for window {community.window}")
    vals = dict(structural) if structural is not None else structural_features(community.members, snapshot)
    vals["alpha"] = context.alpha
    vals["beta"] = context.beta
    vals["previous_event"] = float(context.previous_event)
    vals["ilhan_aging"] = _ratio(context.age, context.windows_elapsed)
    vec = np.array([vals[n] for n in FEATURE_NAMES], dtype=float)
    if not np.all(np.isfinite(vec)):
        bad = [n for n, v in zip(FEATURE_NAMES, vec) if not np.isfinite(v)]
        raise DataError(f"non-finite features for community {community.id}: {bad}")
    return vec


def state_columns(length: int) -> tuple[str, ...]:
    """Column names oldest state first: ``<feature>_T-<L>`` ... ``<feature>_T-1``."""
    return tuple(f"{name}_T-{k}" for k in range(length, 0, -1) for name in FEATURE_NAMES)


class FeatureExtractor:
    """Computes chain feature rows with per-community caching."""

    def __init__(
        self,
        snapshots: Mapping[int, SnapshotGraph],
        communities: Mapping[CommunityId, Community],
        events: Sequence[EvolutionEvent],
    ) -> None:
        self.snapshots = snapshots
        self.communities = communities
        self.graph = EventGraph(events)
        self._structural: dict[CommunityId, dict[str, float]] = {}
        self._age: dict = {}

    def structural(self, cid: CommunityId) -> dict[str, float]:
        if cid not in self._structural:
            c = self.communities[cid]
            snap = self.snapshots.get(c.window)
            if snap is None:
                raise DataError(f"no snapshot for window {c.window}")
            self._structural[cid] = structural_features(c.members, snap)
        return self._structural[cid]

    def chain_row(self, chain: EvolutionChain) -> np.ndarray:
        parts = []
        for k, cid in enumerate(chain.states):
            prev = chain.previous_event(k)
            fwd, bwd = chain.inclusions[k]
            ctx = StateContext(
                alpha=fwd,
                beta=bwd,
                previous_event=prev.ordinal if prev is not None else 0,
                age=self.graph.age(cid, self._age),
                windows_elapsed=cid[0] + 1,
            )
            c = self.communities[cid]
            parts.append(extract_state_features(c, self.snapshots.get(c.window), ctx, self.structural(cid)))
        return np.concatenate(parts)


def column_mask(length: int, features: Sequence[str] | np.ndarray | None = None, last_states: int | None = None) -> np.ndarray:
    """Boolean mask over ``state_columns(length)``.

    ``features`` restricts every state to the given feature names (or a
    91-long boolean mask); ``last_states`` keeps only the most recent states.
    """
    per_state = np.ones(N_FEATURES, dtype=bool)
    if features is not None:
        features = np.asarray(features)
        if features.dtype == bool:
            if len(features) != N_FEATURES:
                raise DataError(f"feature mask must have {N_FEATURES} entries, got {len(features)}")
            per_state = features.copy()
        else:
            per_state = np.zeros(N_FEATURES, dtype=bool)
            for name in features:
                if name not in FEATURE_INDEX:
                    raise DataError(f"unknown feature {name!r}")
                per_state[FEATURE_INDEX[name]] = True
    mask = np.tile(per_state, length)
    if last_states is not None:
        if not 1 <= last_states <= length:
            raise DataError(f"last_states must be in [1, {length}]")
        mask[: (length - last_states) * N_FEATURES] = False
    return mask


def build_dataset(
    chains: Sequence[EvolutionChain],
    extractor: FeatureExtractor,
    length: int | None = None,
    mask: np.ndarray | None = None,
    provenance: dict | None = None,
) -> MLDataset:
    """Feature matrix for ``chains`` (all of equal length) with the next event as label."""
    if not chains:
        raise DataError("cannot build a dataset from zero chains")
    lengths = {c.length for c in chains}
    if len(lengths) != 1:
        raise DataError(f"chains of mixed lengths {sorted(lengths)}")
    L = lengths.pop()
    if length is not None and length != L:
        raise DataError(f"expected chains of length {length}, got {L}")
    X = np.vstack([extractor.chain_row(c) for c in chains])
    cols = state_columns(L)
    ds = MLDataset(X, np.array([c.label.value for c in chains], dtype=object), cols, tuple(c.key for c in chains), dict(provenance or {}))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if len(mask) != len(cols):
            raise DataError(f"mask has {len(mask)} entries for {len(cols)} columns")
        ds = ds.select_columns(mask)
    return ds
