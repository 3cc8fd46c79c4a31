from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gep.errors import DataError
from gep.evaluate import (
    confusion,
    evaluate,
    f_measure,
    friedman_ranks,
    plain_average,
    report_from_dict,
    weighted_average,
    write_comparison_matrix,
)


def test_per_class_scores():
    rep = evaluate(list("aaabbc"), list("aabbbb"))
    assert rep.classes == ("a", "b", "c")
    assert rep.precision == (1.0, 0.5, 0.0)
    assert rep.recall == pytest.approx((2 / 3, 1.0, 0.0))
    assert rep.f[2] == 0.0
    assert rep.plain_f == pytest.approx(np.mean([0.8, 2 / 3, 0.0]))
    assert rep.accuracy == pytest.approx(4 / 6) == rep.micro_f


def test_weighted_and_plain():
    assert plain_average([]) == 0.0
    assert weighted_average([1.0, 0.0], [3, 1]) == 0.75
    assert f_measure(0.0, 0.0) == 0.0


def test_confusion_errors_and_sum():
    with pytest.raises(DataError):
        confusion(["a"], [])
    with pytest.raises(DataError):
        confusion([], [])
    total = confusion(["a"], ["b"]) + confusion(["c"], ["c"])
    assert total.classes == ("a", "b", "c") and total.total == 2


def test_report_dict_roundtrip():
    rep = evaluate(list("aabc"), list("abbc"))
    assert report_from_dict(rep.to_dict()) == rep


def test_comparison_matrix(tmp_path):
    write_comparison_matrix(["m1"], [evaluate(list("ab"), list("ab"))], tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines() == ["classifier,a,b,plain_f", "m1,1.0,1.0,1.0"]


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 8), st.integers(2, 12), st.integers(0, 10**6))
def test_friedman_rank_sum(k, n, seed):
    scores = np.random.default_rng(seed).integers(0, 4, (k, n)).astype(float)
    res = friedman_ranks(scores)
    assert sum(res.average_ranks) == pytest.approx(k * (k + 1) / 2)
    assert 0.0 <= res.p_value <= 1.0


def test_friedman_ties_and_order():
    res = friedman_ranks(np.ones((4, 5)))
    assert res.average_ranks == (2.5, 2.5, 2.5, 2.5) and res.statistic == 0.0
    res = friedman_ranks(np.array([[0.9, 0.8], [0.1, 0.2]]))
    assert res.average_ranks == (1.0, 2.0)
    with pytest.raises(DataError):
        friedman_ranks(np.ones((1, 3)))
    with pytest.raises(DataError):
        friedman_ranks(np.array([[1.0, np.nan], [1.0, 2.0]]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("xyz"), st.sampled_from("xyz")), min_size=1, max_size=60))
def test_metric_ranges(pairs):
    a, p = zip(*pairs)
    rep = evaluate(a, p)
    for v in (*rep.f, rep.plain_f, rep.macro_f, rep.micro_f, rep.weighted_f, rep.accuracy):
        assert 0.0 <= v <= 1.0
    assert rep.micro_f == pytest.approx(rep.accuracy)
    assert sum(rep.support) == len(pairs)
