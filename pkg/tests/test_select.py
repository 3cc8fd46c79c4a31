from __future__ import annotations

import numpy as np
import pytest

from gep.errors import ConfigError, DataError
from gep.learn import MLDataset
from gep.learn.sampling import rng_for
from gep.select import (
    FeatureMask,
    FeatureRanking,
    FitnessFunction,
    GAConfig,
    backward_elimination,
    evolve,
    fitness_value,
    merge_rankings,
    rank_features,
    run_ga,
)
from gep.synth import planted_feature_dataset


def test_fitness_arithmetic():
    assert fitness_value(0.5, 10, 100) == 0.38
    assert fitness_value(0.9, 0, 10) == -1.0
    assert fitness_value(1.0, 5, 5, gamma=1.0, delta=0.0) == 1.0


def test_mask_identity():
    a = FeatureMask(np.array([1, 0, 1], dtype=bool))
    assert a == FeatureMask([True, False, True]) and hash(a) == hash(FeatureMask([True, False, True]))
    assert a.count == 2 and a.names(["x", "y", "z"]) == ["x", "z"]


def test_config_validation():
    with pytest.raises(ConfigError):
        GAConfig(mutation=1.5)
    with pytest.raises(ConfigError):
        GAConfig(population=0)
    with pytest.raises(ConfigError):
        GAConfig(population=2, elitism=3)


def test_ga_on_onemax_is_monotone_and_finds_optimum():
    cfg = GAConfig(generations=40, population=30, mutation=0.05)
    res = run_ga(lambda b: float(b.sum()), 20, cfg, rng_for(0))
    assert all(b >= a for a, b in zip(res.best_history, res.best_history[1:]))
    assert len(res.best_history) == cfg.generations + 1
    assert res.best_fitness >= 18


def test_ga_without_elitism_still_reports_best_ever():
    cfg = GAConfig(generations=15, population=6, elitism=0, mutation=0.3)
    res = run_ga(lambda b: float(b[:3].sum() - b[3:].sum()), 12, cfg, rng_for(1))
    assert all(b >= a for a, b in zip(res.best_history, res.best_history[1:]))


def test_fitness_cache_is_exact():
    ds = planted_feature_dataset(n_rows=120, n_features=10, informative=(1, 2, 3), seed=0)
    tr, va = ds.subset(range(80)), ds.subset(range(80, 120))
    f = FitnessFunction(tr, va, GAConfig(n_trees=5), seed=3)
    bits = np.zeros(10, dtype=bool)
    bits[[1, 2, 3]] = True
    first = f(bits)
    assert f(bits) == first and f.evaluations == 1
    assert FitnessFunction(tr, va, GAConfig(n_trees=5), seed=3)(bits) == first
    assert f(np.zeros(10, dtype=bool)) == -1.0


def test_evolve_prefers_informative_columns():
    ds = planted_feature_dataset(n_rows=200, n_features=12, informative=(0, 5), seed=1)
    tr, va = ds.subset(range(140)), ds.subset(range(140, 200))
    res = evolve(tr, va, GAConfig(generations=8, population=16, n_trees=10), seed=2)
    assert res.best.bits[0] and res.best.bits[5]
    assert res.evaluations > 0


def test_rank_features_and_csv(tmp_path):
    ds = planted_feature_dataset(n_rows=80, n_features=6, informative=(0, 1, 2), seed=2)
    cfg = GAConfig(generations=2, population=6, runs_per_fold=1, n_trees=3)
    seen = []
    r = rank_features(ds, cfg, seed=0, progress=lambda fi, run, res: seen.append(fi))
    assert r.n_masks == 10 and seen == list(range(10))
    assert r.occurrences.max() <= 10
    r.to_csv(tmp_path / "r.csv")
    back = FeatureRanking.from_csv(tmp_path / "r.csv")
    assert back.ordered() == r.ordered()
    assert (tmp_path / "r.csv").read_text().splitlines()[1].endswith(",other")
    with pytest.raises(DataError):
        rank_features(ds.subset(range(10)), cfg)


def test_merge_rankings():
    a = FeatureRanking(("x", "y"), np.array([4.0, 2.0]), 10)
    b = FeatureRanking(("y", "x"), np.array([6.0, 0.0]), 10)
    m = merge_rankings([a, b])
    assert m.ordered() == [("y", 4.0), ("x", 2.0)]
    with pytest.raises(DataError):
        merge_rankings([a, FeatureRanking(("x", "z"), np.zeros(2), 1)])
    with pytest.raises(DataError):
        merge_rankings([])


def test_ranking_ties_break_by_column_order():
    r = FeatureRanking(("b", "a", "c"), np.array([1.0, 1.0, 2.0]), 2)
    assert r.top(3) == ["c", "b", "a"]


def test_backward_elimination_drops_noise():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 4))
    y = np.where(X[:, 0] > 0, "a", "b").astype(object)
    res = backward_elimination(MLDataset(X, y, ("s", "n1", "n2", "n3")), "cart", seed=0)
    assert "s" in res.kept
    assert len(res.kept) < 4
    assert res.steps and all(s >= res.baseline for _, s in res.steps[:1])
