from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gep.errors import ConfigError, DataError
from gep.learn import (
    KINDS,
    DecisionTree,
    MLDataset,
    balance_equal_size,
    cross_validate,
    enrich_training,
    load_model,
    make_folds,
    order_labels,
    oversample,
    predict,
    save_model,
    split_train_val,
    split_train_val_test,
    train,
)
from gep.learn.models import resolve_params
from gep.learn.sampling import stratified_parts, rng_for


def blobs(n_per=(30, 20, 10), d=4, seed=0, labels=("growing", "shrinking", "merging")):
    rng = np.random.default_rng(seed)
    X, y = [], []
    for c, (n, lab) in enumerate(zip(n_per, labels)):
        X.append(rng.normal(loc=3.0 * c, size=(n, d)))
        y += [lab] * n
    return MLDataset(np.vstack(X), np.array(y, dtype=object), tuple(f"f{i}" for i in range(d)))


def test_dataset_validation_and_csv(tmp_path):
    with pytest.raises(DataError):
        MLDataset(np.zeros((2, 2)), np.array(["a"]), ("x", "y"))
    with pytest.raises(DataError):
        MLDataset(np.zeros((1, 2)), np.array(["a"]), ("x",))
    ds = blobs()
    ds.to_csv(tmp_path / "d.csv")
    back = MLDataset.from_csv(tmp_path / "d.csv")
    assert np.array_equal(back.X, ds.X) and back.y.tolist() == ds.y.tolist() and back.row_ids == ds.row_ids
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(DataError):
        MLDataset.from_csv(tmp_path / "bad.csv")


def test_order_labels():
    assert order_labels(["merging", "growing", "dissolving"]) == ("dissolving", "growing", "merging")
    assert order_labels(["b", "a"]) == ("a", "b")


def test_tree_fits_xor_exactly():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([0, 1, 1, 0])
    t = DecisionTree().fit(X, y, 2)
    assert t.predict(X).tolist() == y.tolist()
    back = DecisionTree.from_dict(t.to_dict())
    assert np.array_equal(back.predict(X), t.predict(X)) and back.node_count == t.node_count
    with pytest.raises(ValueError):
        DecisionTree(max_features=1).fit(X, y, 2)


def test_tree_depth_limit():
    ds = blobs()
    t = DecisionTree(max_depth=1).fit(ds.X, np.arange(len(ds)) % 3, 3)
    assert t.node_count <= 3


@pytest.mark.parametrize("kind", KINDS)
def test_every_kind_trains_and_roundtrips(kind, tmp_path):
    ds = blobs()
    m = train(ds, kind, seed=5)
    p = predict(m, ds)
    assert set(p.labels.tolist()) <= set(ds.classes)
    save_model(m, tmp_path / "m.json")
    again = predict(load_model(tmp_path / "m.json"), ds)
    assert p.labels.tolist() == again.labels.tolist()
    if kind != "zero-r":
        assert np.mean(p.labels == ds.y) > 0.9


def test_zero_r_predicts_majority():
    ds = blobs()
    assert set(predict(train(ds, "zero-r"), ds).labels.tolist()) == {"growing"}


def test_forest_deterministic_per_seed():
    ds = blobs(seed=2)
    a = train(ds, "random-forest", {"n_trees": 7}, seed=1)
    b = train(ds, "random-forest", {"n_trees": 7}, seed=1)
    assert a.to_dict() == b.to_dict()
    assert train(ds, "random-forest", {"n_trees": 7}, seed=2).to_dict() != a.to_dict()


def test_forest_with_all_features_equals_bagging():
    ds = blobs(seed=4)
    rf = train(ds, "random-forest", {"n_trees": 3, "max_features": None}, seed=9)
    bag = train(ds, "bagging-cart", {"n_trees": 3}, seed=9)
    assert [t.to_dict() for t in rf.state["trees"]] == [t.to_dict() for t in bag.state["trees"]]


def test_params_and_errors():
    with pytest.raises(ConfigError):
        resolve_params("svm")
    with pytest.raises(ConfigError):
        resolve_params("knn", {"k": 0})
    with pytest.raises(ConfigError):
        resolve_params("cart", {"depth": 3})
    one = MLDataset(np.zeros((3, 1)), np.array(["a"] * 3, dtype=object), ("x",))
    with pytest.raises(DataError):
        train(one, "cart")
    assert predict(train(one, "zero-r"), one).labels.tolist() == ["a"] * 3
    m = train(blobs(), "cart")
    with pytest.raises(DataError):
        predict(m, blobs(d=3))


def test_balance_equal_size_exact_counts():
    ds = blobs()
    bal = balance_equal_size(ds, seed=3)
    assert set(bal.class_counts().values()) == {10}
    assert set(bal.row_ids) <= set(ds.row_ids)
    over = oversample(ds, seed=3)
    assert set(over.class_counts().values()) == {30}
    assert len(set(over.row_ids)) == len(over)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=2, max_size=120), st.integers(0, 1000))
def test_balance_property(labels, seed):
    ds = MLDataset(np.arange(len(labels), dtype=float)[:, None], np.array(labels, dtype=object), ("x",))
    counts = balance_equal_size(ds, seed).class_counts()
    assert len(set(counts.values())) == 1
    assert set(counts) == set(labels)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=200), st.integers(0, 1000))
def test_stratified_parts_proportional(labels, seed):
    y = np.array(labels, dtype=object)
    parts = stratified_parts(y, range(5), rng_for(seed))
    for lab in set(labels):
        counts = np.bincount(parts[y == lab], minlength=5)
        assert counts.max() - counts.min() <= 1


def test_splits():
    ds = blobs(n_per=(40, 24, 16))
    tr, va, te = split_train_val_test(ds, 0)
    assert (len(tr), len(va), len(te)) == (30, 10, 40)
    assert not set(tr.row_ids) & set(te.row_ids)
    a, b = split_train_val(ds, 0)
    assert (len(a), len(b)) == (60, 20)
    with pytest.raises(DataError):
        split_train_val_test(ds.subset(range(5)), 0)


def test_folds_partition_rows():
    y = blobs().y
    for scheme, n in (("stratified-10-fold", 10), ("5x2-fold", 10)):
        folds = make_folds(y, scheme, 0)
        assert len(folds) == n
        for f in folds:
            assert sorted(np.concatenate([f.train, f.test]).tolist()) == list(range(len(y)))
    tests = np.concatenate([f.test for f in make_folds(y, "stratified-10-fold", 0)])
    assert sorted(tests.tolist()) == list(range(len(y)))
    with pytest.raises(ConfigError):
        make_folds(y, "loo", 0)


def test_small_class_warns():
    ds = blobs(n_per=(30, 20, 3))
    with pytest.warns(UserWarning, match="smallest class"):
        cross_validate(ds, "cart", scheme="stratified-10-fold")


def test_cross_validate_balancing_touches_training_only():
    ds = blobs()
    res = cross_validate(ds, "knn", balancing="equal-size", seed=1)
    assert res.confusion.total == len(ds)
    assert sum(res.aggregate.support) == len(ds)
    assert res.aggregate.plain_f > 0.8


def test_enrich_training():
    base, ext = blobs(seed=0), blobs(seed=1)
    out = enrich_training(base, ext, classes=["merging"])
    assert len(out) == len(base) + 10
    assert all(r.startswith("ext:") for r in out.row_ids[len(base):])
    with pytest.raises(DataError):
        enrich_training(base, blobs(d=2))
    res = cross_validate(base, "cart", extra_train=out.subset(range(len(base), len(out))))
    assert res.confusion.total == len(base)
