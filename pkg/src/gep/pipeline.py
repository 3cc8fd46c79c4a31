"""End-to-end runs and the experiment scenarios built on them.

A run goes stream -> windows -> snapshots -> communities -> events ->
chains -> feature matrix -> cross-validated classifier. Every stage after
ingest re-raises its failures as :class:`StageError` tagged with the stage
name, and a run that yields no chains stops with :class:`NoEventsError`.
"""

from __future__ import annotations

import json
import platform
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .chains import DEDUP_MODES, EvolutionChain, build_chains, remove_duplicates, restrict_span, write_chains
from .community import CommunityCover, detect, write_covers
from .errors import ConfigError, DataError, GEPError, NoEventsError, StageError
from .evaluate import EvaluationReport, FriedmanResult, confusion, friedman_ranks, report, write_comparison_matrix
from .features import FeatureExtractor, build_dataset, column_mask, write_catalog
from .ingest import TemporalEventStream, load_manifest, parse_stream, stream_summary
from .learn.dataset import MLDataset
from .learn.models import order_labels, predict, resolve_params, train
from .learn.sampling import enrich_training
from .learn.validation import BALANCING, SCHEMES, CVResult, cross_validate, fold_seed, make_folds, rebalance
from .snapshot import GraphBuildSpec, SnapshotGraph, build_snapshot
from .synth import SynthConfig, planted_stream
from .tracking import EvolutionEvent, TrackingConfig, event_histogram, track, write_events
from .windowing import TimeWindow, WindowSpec, make_windows, write_windows

DETECTORS = ("cpm", "modularity")
FEATURE_PRESETS = ("full", "last-3-states", "custom")


@dataclass(frozen=True)
class PipelineConfig:
    """The full parameter sheet of one run.

    The stream comes from ``manifest`` (a dataset manifest), ``stream_path``
    (a bare CSV) or ``synth`` (generator settings, so a synthetic run is
    fully described by its config).
    """

    manifest: str | None = None
    stream_path: str | None = None
    synth: dict | None = None
    window: WindowSpec = WindowSpec(size=100)
    graph: GraphBuildSpec = GraphBuildSpec()
    detector: str = "cpm"
    k: int = 3
    detector_seed: int = 0
    tracking: TrackingConfig = TrackingConfig()
    chain_length: int = 1
    dedup: str = "last-state"
    features: str = "full"
    feature_names: tuple[str, ...] = ()
    zscore: bool = False
    kind: str = "random-forest"
    params: dict = field(default_factory=dict)
    balancing: str = "none"
    cv: str = "stratified-10-fold"
    seed: int = 0

    def __post_init__(self) -> None:
        sources = sum(x is not None for x in (self.manifest, self.stream_path, self.synth))
        if sources != 1:
            raise ConfigError("exactly one of manifest, stream_path or synth must be given")
        for key in ("manifest", "stream_path"):
            path = getattr(self, key)
            if path is not None:
                if not Path(path).exists():
                    raise ConfigError(f"input file not found: {path}")
                object.__setattr__(self, key, str(Path(path).resolve()))
        if self.detector not in DETECTORS:
            raise ConfigError(f"unknown detector {self.detector!r}; choose from {', '.join(DETECTORS)}")
        if self.detector == "cpm" and self.k < 2:
            raise ConfigError("clique size k must be >= 2")
        if self.chain_length < 1:
            raise ConfigError("chain_length must be >= 1")
        if self.dedup not in DEDUP_MODES:
            raise ConfigError(f"unknown dedup mode {self.dedup!r}")
        if self.features not in FEATURE_PRESETS:
            raise ConfigError(f"unknown feature preset {self.features!r}; choose from {', '.join(FEATURE_PRESETS)}")
        if self.features == "custom" and not self.feature_names:
            raise ConfigError("the custom feature preset needs feature_names")
        if self.balancing not in BALANCING:
            raise ConfigError(f"unknown balancing {self.balancing!r}")
        if self.cv not in SCHEMES:
            raise ConfigError(f"unknown CV scheme {self.cv!r}")
        resolve_params(self.kind, self.params)
        if self.synth is not None:
            SynthConfig.from_dict(self.synth)

    def to_dict(self) -> dict:
        return {
            "manifest": self.manifest,
            "stream_path": self.stream_path,
            "synth": self.synth,
            "window": self.window.to_dict(),
            "graph": self.graph.to_dict(),
            "detector": self.detector,
            "k": self.k,
            "detector_seed": self.detector_seed,
            "tracking": self.tracking.to_dict(),
            "chain_length": self.chain_length,
            "dedup": self.dedup,
            "features": self.features,
            "feature_names": list(self.feature_names),
            "zscore": self.zscore,
            "kind": self.kind,
            "params": dict(self.params),
            "balancing": self.balancing,
            "cv": self.cv,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | Path | None = None) -> "PipelineConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        d = dict(d)
        for key in ("manifest", "stream_path"):
            if d.get(key) and base_dir is not None and not Path(d[key]).is_absolute():
                d[key] = str(Path(base_dir) / d[key])
        try:
            if isinstance(d.get("window"), dict):
                d["window"] = WindowSpec.from_dict(d["window"])
            if isinstance(d.get("graph"), dict):
                d["graph"] = GraphBuildSpec.from_dict(d["graph"])
            if isinstance(d.get("tracking"), dict):
                d["tracking"] = TrackingConfig.from_dict(d["tracking"])
            if "feature_names" in d:
                d["feature_names"] = tuple(d["feature_names"])
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if isinstance(raw.get("config"), dict):  # a run manifest
            raw = raw["config"]
        return cls.from_dict(raw, base_dir=path.parent)

    def with_overrides(self, **kw) -> "PipelineConfig":
        return replace(self, **kw)


@contextmanager
def _stage(name: str):
    """Tag any failure inside the block with the stage name."""
    try:
        yield
    except (ConfigError, StageError):
        raise
    except Exception as exc:
        raise StageError(name, str(exc)) from exc


def load_stream(cfg: PipelineConfig) -> TemporalEventStream:
    if cfg.manifest is not None:
        return load_manifest(cfg.manifest)
    if cfg.stream_path is not None:
        return parse_stream(cfg.stream_path, directed=cfg.graph.directed)
    return planted_stream(SynthConfig.from_dict(cfg.synth)).stream


@dataclass
class PipelineResult:
    config: PipelineConfig
    stream: TemporalEventStream
    windows: list[TimeWindow] = field(default_factory=list)
    snapshots: dict[int, SnapshotGraph] = field(default_factory=dict)
    covers: list[CommunityCover] = field(default_factory=list)
    events: list[EvolutionEvent] = field(default_factory=list)
    chains: list[EvolutionChain] = field(default_factory=list)
    dataset: MLDataset | None = None
    cv: CVResult | None = None

    @property
    def report(self) -> EvaluationReport | None:
        return self.cv.aggregate if self.cv is not None else None


STAGES = ("ingest", "windows", "snapshots", "detect", "track", "chains", "features", "learn")


def zscore(data: MLDataset) -> MLDataset:
    """Standardise each column by its own mean and deviation (constant columns become 0)."""
    mu = data.X.mean(axis=0)
    sd = data.X.std(axis=0)
    X = (data.X - mu) / np.where(sd > 0, sd, 1.0)
    return MLDataset(X, data.y, data.columns, data.row_ids, dict(data.provenance, zscore=True))


def feature_mask_for(cfg: PipelineConfig) -> np.ndarray:
    if cfg.features == "full":
        return column_mask(cfg.chain_length)
    if cfg.features == "last-3-states":
        return column_mask(cfg.chain_length, last_states=min(3, cfg.chain_length))
    return column_mask(cfg.chain_length, features=list(cfg.feature_names))


@contextmanager
def _summarised_eigen_warnings():
    """Collapse per-window eigenvector convergence warnings into one."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        yield
    slow = [w for w in caught if "eigenvector centrality did not converge" in str(w.message)]
    for w in caught:
        if w not in slow:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if slow:
        warnings.warn(f"eigenvector centrality hit the iteration cap in {len(slow)} snapshot(s)", RuntimeWarning, stacklevel=3)


def run_pipeline(cfg: PipelineConfig, out_dir: str | Path | None = None, until: str = "learn") -> PipelineResult:
    """Run the stages up to and including ``until``; write artifacts when ``out_dir`` is set."""
    with _summarised_eigen_warnings():
        return _run(cfg, out_dir, until)


def _run(cfg: PipelineConfig, out_dir: str | Path | None, until: str) -> PipelineResult:
    if until not in STAGES:
        raise ConfigError(f"unknown stage {until!r}")
    stop = STAGES.index(until)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(cfg, out)

    stream = load_stream(cfg)
    res = PipelineResult(cfg, stream)
    if out is not None:
        (out / "summary.json").write_text(json.dumps(stream_summary(stream).__dict__, indent=1))
    if stop < 1:
        return res

    with _stage("windows"):
        res.windows = make_windows(stream, cfg.window)
        if out is not None:
            write_windows(res.windows, out / "windows.csv")
    if stop < 2:
        return res

    with _stage("snapshots"):
        for w in res.windows:
            if w.record_count:
                res.snapshots[w.index] = build_snapshot(stream, w.lo, w.hi, cfg.graph, w.index)
            else:
                res.snapshots[w.index] = SnapshotGraph(set(), {}, directed=cfg.graph.directed, window_index=w.index)
    if stop < 3:
        return res

    with _stage("detect"):
        res.covers = [detect(res.snapshots[w.index], cfg.detector, k=cfg.k, seed=cfg.detector_seed) for w in res.windows]
        if out is not None:
            write_covers(res.covers, out / "communities.jsonl", stream.nodes)
    if stop < 4:
        return res

    with _stage("track"):
        res.events = track(res.covers, res.snapshots, cfg.tracking)
        if out is not None:
            write_events(res.events, out / "events.csv")
            (out / "histogram.json").write_text(json.dumps(event_histogram(res.events), indent=1))
    if stop < 5:
        return res

    with _stage("chains"):
        chains = remove_duplicates(build_chains(res.events, cfg.chain_length), cfg.dedup)
        res.chains = chains
        if out is not None:
            write_chains(chains, out / "chains.csv")
    if not res.chains:
        raise NoEventsError()
    if stop < 6:
        return res

    with _stage("features"):
        comms = {c.id: c for cover in res.covers for c in cover.communities}
        extractor = FeatureExtractor(res.snapshots, comms, res.events)
        prov = {"source": cfg.manifest or cfg.stream_path or "synthetic", "windows": [0, len(res.windows) - 1]}
        ds = build_dataset(res.chains, extractor, cfg.chain_length, feature_mask_for(cfg), prov)
        if cfg.zscore:
            ds = zscore(ds)
        res.dataset = ds
        if out is not None:
            ds.to_csv(out / "features.csv")
            write_catalog(out / "catalog.json")
    if stop < 7:
        return res

    with _stage("learn"):
        if len(ds.classes) < 2:
            raise DataError(f"only one event class among the chains ({ds.classes[0]}); nothing to learn")
        res.cv = cross_validate(ds, cfg.kind, cfg.params, cfg.cv, cfg.seed, cfg.balancing)
        if out is not None:
            write_json(res.cv.aggregate.to_dict(), out / "report.json")
            write_json(res.cv.to_dict(), out / "folds.json")
    return res


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def write_manifest(cfg: PipelineConfig, out: Path, extra: dict | None = None) -> None:
    """Resolved config and seed; replaying it with ``gep run`` reproduces the outputs."""
    payload = {"config": cfg.to_dict(), "seed": cfg.seed, "gep_version": __version__, "python": platform.python_version(), "numpy": np.__version__}
    if extra:
        payload.update(extra)
    write_json(payload, out / "run_manifest.json")


def dataset_for(cfg: PipelineConfig) -> MLDataset:
    res = run_pipeline(cfg, until="features")
    assert res.dataset is not None
    return res.dataset


# -- experiments ------------------------------------------------------------


@dataclass
class Comparison:
    kinds: list[str]
    results: dict[str, CVResult]
    errors: dict[str, str]
    scores: np.ndarray  # kinds x folds, plain-average F
    friedman: FriedmanResult | None

    def to_dict(self) -> dict:
        return {
            "kinds": self.kinds,
            "plain_f": {k: self.results[k].aggregate.plain_f for k in self.results},
            "errors": self.errors,
            "fold_scores": {k: row.tolist() for k, row in zip(self.results, self.scores)},
            "friedman": None
            if self.friedman is None
            else {
                "average_ranks": dict(zip(self.results, self.friedman.average_ranks)),
                "statistic": self.friedman.statistic,
                "p_value": self.friedman.p_value,
                "n_datasets": self.friedman.n_datasets,
            },
        }


def compare_classifiers(
    data: MLDataset,
    kinds: Sequence[str],
    scheme: str = "stratified-10-fold",
    seed: int = 0,
    balancing: str = "none",
    params: dict[str, dict] | None = None,
) -> Comparison:
    """Every kind on the same folds; Friedman ranks over per-fold plain F."""
    kinds = list(kinds)
    if len(kinds) < 2:
        raise ConfigError("comparison needs at least 2 classifier kinds")
    results: dict[str, CVResult] = {}
    errors: dict[str, str] = {}
    for kind in kinds:
        try:
            results[kind] = cross_validate(data, kind, (params or {}).get(kind), scheme, seed, balancing)
        except GEPError as exc:
            errors[kind] = str(exc)
    scores = np.array([[r.plain_f for r in res.folds] for res in results.values()]) if results else np.zeros((0, 0))
    fr = friedman_ranks(scores) if len(results) >= 2 and scores.shape[1] >= 2 else None
    return Comparison(kinds, results, errors, scores, fr)


def transfer(
    source: MLDataset,
    target: MLDataset,
    kind: str = "random-forest",
    params: dict | None = None,
    seed: int = 0,
    balance_source: bool = False,
) -> EvaluationReport:
    """Train on all of ``source``, evaluate on all of ``target``."""
    if source.signature != target.signature:
        raise DataError("source and target datasets have different feature signatures")
    tr = rebalance(source, "equal-size", seed) if balance_source else source
    model = train(tr, kind, params, seed)
    classes = order_labels(source.y.tolist() + target.y.tolist())
    return report(confusion(target.y.tolist(), predict(model, target).labels.tolist(), classes))


@dataclass
class Enrichment:
    plain: CVResult
    enriched: CVResult
    added: int

    def deltas(self) -> dict[str, float]:
        a, b = self.plain.aggregate, self.enriched.aggregate
        classes = order_labels(list(a.classes) + list(b.classes))
        return {c: b.f_of(c) - a.f_of(c) for c in classes}

    def to_dict(self) -> dict:
        return {
            "added_rows": self.added,
            "plain": self.plain.aggregate.to_dict(),
            "enriched": self.enriched.aggregate.to_dict(),
            "f_delta": self.deltas(),
            "plain_f_delta": self.enriched.aggregate.plain_f - self.plain.aggregate.plain_f,
        }


def enrich_experiment(
    base: MLDataset,
    external: MLDataset,
    classes: Sequence[str] | None = None,
    kind: str = "random-forest",
    params: dict | None = None,
    scheme: str = "stratified-10-fold",
    seed: int = 0,
    balancing: str = "none",
) -> Enrichment:
    """Same folds twice: plain training folds vs folds enriched with external rows."""
    if base.signature != external.signature:
        raise DataError("external dataset has a different feature signature (catalog or chain length)")
    extra = enrich_training(base.subset([]), external, classes) if len(external) else base.subset([])
    plain = cross_validate(base, kind, params, scheme, seed, balancing)
    if len(extra) == 0:
        return Enrichment(plain, plain, 0)
    enriched = cross_validate(base, kind, params, scheme, seed, balancing, extra_train=extra)
    return Enrichment(plain, enriched, len(extra))


@dataclass
class DriftResult:
    periods: list[tuple[int, int]]
    per_period: list[EvaluationReport | None]
    whole_span: list[EvaluationReport | None]
    skipped: dict[int, str]

    def to_dict(self) -> dict:
        rows = []
        for i, (span, a, b) in enumerate(zip(self.periods, self.per_period, self.whole_span)):
            rows.append(
                {
                    "period": i,
                    "windows": list(span),
                    "per_period_plain_f": None if a is None else a.plain_f,
                    "whole_span_plain_f": None if b is None else b.plain_f,
                    "skipped": self.skipped.get(i),
                }
            )
        return {"periods": rows}


def period_ranges(n_windows: int, periods: int) -> list[tuple[int, int]]:
    if periods < 1:
        raise ConfigError("period count must be >= 1")
    if n_windows < 2 * periods:
        raise DataError(f"{n_windows} windows are too few for {periods} periods (need >= {2 * periods})")
    edges = np.linspace(0, n_windows, periods + 1).round().astype(int)
    return [(int(a), int(b) - 1) for a, b in zip(edges[:-1], edges[1:])]


def drift_experiment(
    data: MLDataset,
    chains: Sequence[EvolutionChain],
    n_windows: int,
    periods: int,
    kind: str = "random-forest",
    params: dict | None = None,
    scheme: str = "stratified-10-fold",
    seed: int = 0,
    balancing: str = "none",
) -> DriftResult:
    """Per-period models against one whole-span model on the same held-out rows.

    Folds are drawn over all chains. In each fold the whole-span model learns
    from every training row and the period model only from training rows
    whose chain lies inside that period; both predict the period's test rows.
    """
    if len(chains) != len(data):
        raise DataError("chains and dataset rows are misaligned")
    spans = period_ranges(n_windows, periods)
    key_row = {rid: i for i, rid in enumerate(data.row_ids)}
    member = []
    for first, last in spans:
        rows = {key_row[c.key] for c in restrict_span(chains, first, last)}
        member.append(np.array(sorted(rows), dtype=np.int64))
    folds = make_folds(data.y, scheme, seed)
    classes = order_labels(data.y.tolist())
    cms_p: list = [None] * periods
    cms_w: list = [None] * periods
    reasons: dict[int, str] = {}
    for fi, fold in enumerate(folds):
        s = fold_seed(seed, fi)
        whole = train(rebalance(data.subset(fold.train), balancing, s), kind, params, s)
        train_set = set(fold.train.tolist())
        test_set = set(fold.test.tolist())
        for p, rows in enumerate(member):
            te = [r for r in rows.tolist() if r in test_set]
            tr = [r for r in rows.tolist() if r in train_set]
            if not te:
                continue
            tr_ds = data.subset(tr)
            if len(tr_ds) == 0 or len(tr_ds.classes) < 2:
                reasons[p] = "fewer than 2 classes in every period training fold"
                continue
            local = train(rebalance(tr_ds, balancing, s), kind, params, s)
            te_ds = data.subset(te)
            for model, cms in ((local, cms_p), (whole, cms_w)):
                cm = confusion(te_ds.y.tolist(), predict(model, te_ds).labels.tolist(), classes)
                cms[p] = cm if cms[p] is None else cms[p] + cm
    skipped = {p: reasons.get(p, "no chains inside this period") for p in range(periods) if cms_p[p] is None}
    per = [report(c) if c is not None else None for c in cms_p]
    whole_r = [report(c) if c is not None else None for c in cms_w]
    return DriftResult(spans, per, whole_r, skipped)


def save_comparison(cmp: Comparison, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_json(cmp.to_dict(), out / "comparison.json")
    names = list(cmp.results)
    write_comparison_matrix(names, [cmp.results[k].aggregate for k in names], out / "comparison_matrix.csv")
