from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from ctxengage.registry import FEATURES, ORACLE_FEATURES, categorised_name, feature_set
from ctxengage.select import (FeatureFrame, chi_square, quantile_bin, select_top_k, string_index,
                              vector_name, vectorise)
from ctxengage.table import ColumnTable


def contingency_chi_square(feature, label):
    """Direct sum over an explicit category x class table."""
    n = len(feature)
    cats, classes = sorted(set(feature)), sorted(set(label))
    total = 0.0
    for v in cats:
        in_cat = [c for f, c in zip(feature, label) if f == v]
        for c in classes:
            observed = sum(1 for x in in_cat if x == c)
            expected = len(in_cat) * sum(1 for x in label if x == c) / n
            total += (observed - expected) ** 2 / expected
    return total


def test_string_index_examples():
    codes, mapping = string_index(["a", "a", "b"])
    assert mapping == {"a": 0, "b": 1} and codes.tolist() == [0, 0, 1]
    _, mapping = string_index(["b", "a"])
    assert mapping == {"a": 0, "b": 1}
    codes, _ = string_index(["z", "z", "z"])
    assert codes.tolist() == [0, 0, 0]


def test_string_index_orders_by_frequency():
    values = list("ccbbbaddddd")
    _, mapping = string_index(values)
    freq = Counter(values)
    assert sorted(mapping, key=mapping.get) == sorted(freq, key=lambda v: (-freq[v], v))


def test_quantile_bin_examples():
    bins, cuts = quantile_bin(np.full(50, 3.0))
    assert bins.tolist() == [0] * 50 and len(cuts) == 0
    bins, _ = quantile_bin(np.arange(1000))
    sizes = np.bincount(bins)
    assert len(sizes) == 100 and sizes.min() >= 9 and sizes.max() <= 11
    x = np.random.default_rng(0).standard_normal(5000)
    bins, _ = quantile_bin(x)
    order = np.argsort(x)
    assert np.all(np.diff(bins[order]) >= 0)


def test_chi_square_examples():
    assert chi_square([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(4.0, abs=1e-12)
    assert chi_square([0, 1, 0, 1], [0, 0, 1, 1]) == 0.0
    assert chi_square([7, 7, 7, 7], [0, 1, 0, 1]) == 0.0


def test_chi_square_matches_contingency_oracle():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(2, 300))
        f = rng.integers(0, int(rng.integers(1, 11)), n)
        c = rng.integers(0, 2, n)
        if len(set(c.tolist())) < 2:
            c[0], c[-1] = 0, 1
        assert chi_square(f, c) == pytest.approx(contingency_chi_square(f.tolist(), c.tolist()),
                                                 abs=1e-9)


def test_select_top_k_properties():
    rng = np.random.default_rng(3)
    names = [f"f{i}" for i in range(60)]
    label = rng.integers(0, 2, 400)
    cols = {n: rng.integers(0, 5, 400) for n in names}
    cols["f42"] = label.copy()  # planted perfect predictor
    scores = {n: chi_square(cols[n], label) for n in names}
    top = {k: select_top_k(scores, k, names) for k in (5, 10, 25, 50)}
    assert top[5][0] == "f42"
    assert set(top[5]) <= set(top[10]) <= set(top[25]) <= set(top[50])
    assert set(select_top_k(scores, 60, names)) == set(names)
    with pytest.raises(ValueError):
        select_top_k(scores, 61, names)


def test_select_top_k_ties_keep_candidate_order():
    assert select_top_k({"a": 1.0, "b": 2.0, "c": 1.0, "d": 1.0}, 3, ["d", "a", "b", "c"]) == \
        ["b", "d", "a"]


def test_vector_names_and_lengths():
    assert vector_name("top_5", "scaled", "like") == "ev__top_5__scaled__like__sdotd"
    assert len(feature_set("scaled")) == len(FEATURES) == 185
    assert len(feature_set("oracle_scaled")) == 193
    assert feature_set("oracle_scaled")[-8:] == ORACLE_FEATURES


def test_feature_frame_vectors_and_validation():
    names = [categorised_name(n) for n in FEATURES[:3]]
    table = ColumnTable({"row_id": [1, 2], "like": [0, 1], **{n: [1.0, 2.0] for n in names}})
    frame = vectorise(FeatureFrame.from_table(table), {"v": names[::-1]})
    assert frame.vector("v").tolist() == [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]
    assert frame.labels["like"].tolist() == [0, 1]
    with pytest.raises(KeyError):
        vectorise(frame, {"w": ["nope"]})
    bad = ColumnTable({"row_id": [1], "x": [float("nan")]})
    with pytest.raises(ValueError):
        FeatureFrame.from_table(bad)
