"""Evolutionary feature selection, occurrence rankings and backward elimination.

A candidate subset is a binary mask over the dataset columns. Its fitness is

    gamma * F1(mask) - delta * (selected count) / d

where F1 is the weighted F-measure of a small random forest trained on the
masked training rows and scored on the masked validation rows. The forest
seed is derived from the run seed and the mask bits, so a mask always gets
the same fitness within a run and fitness values can be memoised.
"""

from __future__ import annotations

import csv
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .evaluate import confusion, report
from .learn.dataset import MLDataset
from .learn.models import order_labels, predict, train
from .learn.sampling import rng_for, split_train_val
from .learn.validation import cross_validate, five_by_two_folds


@dataclass(frozen=True)
class FeatureMask:
    bits: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=bool).copy())

    @property
    def d(self) -> int:
        return len(self.bits)

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def names(self, columns: Sequence[str]) -> list[str]:
        return [columns[i] for i in self.indices]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FeatureMask) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(np.packbits(self.bits).tobytes())


@dataclass(frozen=True)
class GAConfig:
    generations: int = 100
    population: int = 500
    mutation: float = 0.02
    crossover: float = 0.7
    tournament: int = 3
    gamma: float = 0.8
    delta: float = 0.2
    runs_per_fold: int = 100
    n_trees: int = 20
    elitism: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("mutation", "crossover"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} probability must lie in [0, 1]")
        for name in ("generations", "population", "tournament", "runs_per_fold", "n_trees"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0 <= self.elitism <= self.population:
            raise ConfigError("elitism must lie in [0, population]")

    def to_dict(self) -> dict:
        return asdict(self)


def fitness_value(f1: float, count: int, d: int, gamma: float = 0.8, delta: float = 0.2) -> float:
    """Scalarised objective; an empty mask scores -1 so selection purges it."""
    if count == 0:
        return -1.0
    return gamma * f1 - delta * (count / d)


def mask_seed(seed: int, bits: np.ndarray) -> int:
    words = np.packbits(bits).tolist()
    return int(np.random.SeedSequence([seed, len(bits), *words]).generate_state(1)[0])


def subset_f1(train_ds: MLDataset, val_ds: MLDataset, bits: np.ndarray, n_trees: int, seed: int) -> float:
    """Weighted F of a random forest on the selected columns."""
    cols = np.flatnonzero(bits)
    tr, va = train_ds.select_columns(cols), val_ds.select_columns(cols)
    model = train(tr, "random-forest", {"n_trees": n_trees}, seed=seed)
    classes = order_labels(tr.y.tolist() + va.y.tolist())
    return report(confusion(va.y.tolist(), predict(model, va).labels.tolist(), classes)).weighted_f


class FitnessFunction:
    """Memoised mask -> fitness for one train/validation pair."""

    def __init__(self, train_ds: MLDataset, val_ds: MLDataset, cfg: GAConfig, seed: int) -> None:
        if train_ds.signature != val_ds.signature:
            raise DataError("train and validation sets have different columns")
        if len(train_ds.classes) < 2:
            raise DataError("degenerate training set: fewer than 2 classes")
        self.train, self.val, self.cfg, self.seed = train_ds, val_ds, cfg, seed
        self.d = train_ds.n_features
        self.cache: dict[bytes, float] = {}
        self.evaluations = 0

    def __call__(self, bits: np.ndarray) -> float:
        bits = np.asarray(bits, dtype=bool)
        key = np.packbits(bits).tobytes()
        if key not in self.cache:
            count = int(bits.sum())
            f1 = 0.0 if count == 0 else subset_f1(self.train, self.val, bits, self.cfg.n_trees, mask_seed(self.seed, bits))
            self.cache[key] = fitness_value(f1, count, self.d, self.cfg.gamma, self.cfg.delta)
            self.evaluations += 1
        return self.cache[key]


def fitness(mask: FeatureMask, train_ds: MLDataset, val_ds: MLDataset, cfg: GAConfig, seed: int = 0) -> float:
    return FitnessFunction(train_ds, val_ds, cfg, seed)(mask.bits)


@dataclass
class GAResult:
    best: FeatureMask
    best_fitness: float
    best_history: list[float] = field(default_factory=list)  # best-ever after each generation (index 0 = initial)
    mean_history: list[float] = field(default_factory=list)
    evaluations: int = 0


def _tournament(fit: np.ndarray, size: int, rng: np.random.Generator) -> int:
    cand = rng.integers(0, len(fit), size=size)
    return int(cand[np.argmax(fit[cand])])


def run_ga(
    score: Callable[[np.ndarray], float],
    d: int,
    cfg: GAConfig,
    rng: np.random.Generator,
    initial: np.ndarray | None = None,
) -> GAResult:
    """Generational GA over ``d``-bit masks maximising ``score``."""
    pop = rng.random((cfg.population, d)) < 0.5 if initial is None else np.asarray(initial, dtype=bool).copy()
    fit = np.array([score(ind) for ind in pop])
    b = int(np.argmax(fit))
    best, best_fit = pop[b].copy(), float(fit[b])
    res = GAResult(FeatureMask(best), best_fit, [best_fit], [float(fit.mean())])
    for _ in range(cfg.generations):
        elite = np.argsort(-fit, kind="stable")[: cfg.elitism]
        children = [pop[i].copy() for i in elite]
        while len(children) < cfg.population:
            a = pop[_tournament(fit, cfg.tournament, rng)].copy()
            c = pop[_tournament(fit, cfg.tournament, rng)].copy()
            if d > 1 and rng.random() < cfg.crossover:
                cut = int(rng.integers(1, d))
                a[cut:], c[cut:] = c[cut:].copy(), a[cut:].copy()
            for child in (a, c):
                child ^= rng.random(d) < cfg.mutation
                if len(children) < cfg.population:
                    children.append(child)
        pop = np.array(children)
        fit = np.array([score(ind) for ind in pop])
        b = int(np.argmax(fit))
        if fit[b] > best_fit:
            best, best_fit = pop[b].copy(), float(fit[b])
        res.best_history.append(best_fit)
        res.mean_history.append(float(fit.mean()))
    res.best, res.best_fitness = FeatureMask(best), best_fit
    return res


def evolve(train_ds: MLDataset, val_ds: MLDataset, cfg: GAConfig = GAConfig(), seed: int | None = None) -> GAResult:
    """Best-ever mask of one GA run with fitness measured on ``val_ds``."""
    seed = cfg.seed if seed is None else seed
    f = FitnessFunction(train_ds, val_ds, cfg, seed)
    res = run_ga(f, train_ds.n_features, cfg, rng_for(seed, 1))
    res.evaluations = f.evaluations
    return res


def column_kind(column: str) -> str:
    from .features import FEATURE_INDEX, feature_kind

    base = re.sub(r"_T-\d+$", "", column)
    return feature_kind(base) if base in FEATURE_INDEX else "other"


@dataclass
class FeatureRanking:
    columns: tuple[str, ...]
    occurrences: np.ndarray
    n_masks: int
    folds: int = 0
    runs: int = 0

    def ordered(self) -> list[tuple[str, float]]:
        order = np.lexsort((np.arange(len(self.columns)), -self.occurrences))
        return [(self.columns[i], float(self.occurrences[i])) for i in order]

    def top(self, n: int) -> list[str]:
        return [c for c, _ in self.ordered()[:n]]

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rank", "feature", "occurrences", "feature_type"])
            for r, (c, occ) in enumerate(self.ordered(), start=1):
                w.writerow([r, c, f"{occ:g}", column_kind(c)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureRanking":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise DataError(f"{path}: empty ranking")
        return cls(tuple(r["feature"] for r in rows), np.array([float(r["occurrences"]) for r in rows]), 0)


def rank_features(
    data: MLDataset,
    cfg: GAConfig = GAConfig(),
    seed: int | None = None,
    progress: Callable[[int, int, GAResult], None] | None = None,
) -> FeatureRanking:
    """Count how often each column appears in the best masks of repeated GA runs.

    The rows are cut into 5x2 folds; each training half is split 0.75/0.25
    into GA train/validation sets and the GA runs ``cfg.runs_per_fold`` times
    on it.
    """
    seed = cfg.seed if seed is None else seed
    if len(data) < 16 or min(data.class_counts().values()) < 2:
        raise DataError("dataset too small for 5x2 folds (need >= 16 rows and >= 2 rows per class)")
    occ = np.zeros(data.n_features)
    folds = five_by_two_folds(data.y, seed)
    n_masks = 0
    for fi, fold in enumerate(folds):
        tr, va = split_train_val(data.subset(fold.train), seed=int(rng_for(seed, 2, fi).integers(2**31)))
        for run in range(cfg.runs_per_fold):
            res = evolve(tr, va, cfg, seed=int(rng_for(seed, 3, fi, run).integers(2**31)))
            occ += res.best.bits
            n_masks += 1
            if progress is not None:
                progress(fi, run, res)
    return FeatureRanking(data.columns, occ, n_masks, len(folds), cfg.runs_per_fold)


def merge_rankings(rankings: Sequence[FeatureRanking]) -> FeatureRanking:
    """Average occurrences across rankings built over the same columns."""
    if not rankings:
        raise DataError("nothing to merge")
    names = set(rankings[0].columns)
    for r in rankings[1:]:
        if set(r.columns) != names:
            raise DataError("rankings cover different feature sets (different catalog or chain length)")
    cols = rankings[0].columns
    stacked = []
    for r in rankings:
        pos = {c: i for i, c in enumerate(r.columns)}
        stacked.append([r.occurrences[pos[c]] for c in cols])
    return FeatureRanking(cols, np.mean(stacked, axis=0), int(round(np.mean([r.n_masks for r in rankings]))))


@dataclass
class EliminationResult:
    mask: FeatureMask
    columns: tuple[str, ...]
    baseline: float
    steps: list[tuple[str, float]] = field(default_factory=list)  # (removed column, score afterwards)

    @property
    def kept(self) -> list[str]:
        return self.mask.names(self.columns)


def backward_elimination(
    data: MLDataset,
    kind: str = "cart",
    seed: int = 0,
    params: dict | None = None,
    scheme: str = "stratified-10-fold",
) -> EliminationResult:
    """Greedy removal while the cross-validated plain-average F does not drop.

    Each step removes the column whose removal gives the best score; a tie
    with the current score still removes it, so uninformative columns go.
    At least one column always survives.
    """
    if len(data) < 2 or len(data.classes) < 2:
        raise DataError("backward elimination needs at least 2 rows and 2 classes")

    def score(bits: np.ndarray) -> float:
        return cross_validate(data.select_columns(bits), kind, params, scheme, seed).aggregate.plain_f

    bits = np.ones(data.n_features, dtype=bool)
    current = score(bits)
    out = EliminationResult(FeatureMask(bits), data.columns, current)
    while bits.sum() > 1:
        trials = []
        for i in np.flatnonzero(bits):
            b = bits.copy()
            b[i] = False
            trials.append((score(b), -i))
        best_score, neg_i = max(trials)
        if best_score < current:
            break
        bits[-neg_i] = False
        current = best_score
        out.steps.append((data.columns[-neg_i], best_score))
    out.mask = FeatureMask(bits)
    return out
