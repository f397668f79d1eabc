from __future__ import annotations

from collections import Counter, defaultdict

import numpy as np
import pytest

from ctxengage.feat_graph import (DirectedEdgeSet, annotate_graph_features, build_engagement_graph,
                                  build_engagement_graphs, build_follow_graph, follower_ratios,
                                  graph_stage, second_degree)
from ctxengage.registry import GRAPH_FEATURES, TARGETS
from ctxengage.table import ColumnTable


def pairs_table(viewers, authors, follows, labels=None) -> ColumnTable:
    cols = {"engaging_user_id": list(viewers), "engaged_with_user_id": list(authors),
            "engagee_follows_engager": [bool(f) for f in follows]}
    for kind in TARGETS:
        cols[kind] = list(labels[kind]) if labels else [0] * len(viewers)
    return ColumnTable(cols)


def random_graph(rng, n_nodes, n_edges):
    src = [f"u{i}" for i in rng.integers(0, n_nodes, n_edges)]
    dst = [f"u{i}" for i in rng.integers(0, n_nodes, n_edges)]
    return DirectedEdgeSet.from_pairs(src, dst)


def triple_loop(edges):
    nodes = sorted(set(edges.src.tolist()) | set(edges.dst.tolist()))
    has = edges.pairs()
    return {(a, c) for a in nodes for b in nodes if (a, b) in has
            for c in nodes if (b, c) in has}


def random_history(rng, n, n_users=30):
    viewers = [f"u{i}" for i in rng.integers(0, n_users, n)]
    authors = [f"u{i}" for i in rng.integers(0, n_users, n)]
    labels = {k: rng.random(n) < 0.3 for k in ("like", "reply", "retweet", "quote")}
    labels["react"] = labels["like"] | labels["reply"] | labels["retweet"] | labels["quote"]
    labels = {k: v.astype(int).tolist() for k, v in labels.items()}
    return pairs_table(viewers, authors, rng.random(n) < 0.2, labels)


def test_follow_graph_takes_the_positive_case():
    edges = build_follow_graph([pairs_table(["v", "v"], ["a", "a"], [True, False])])
    assert edges.pairs() == {("v", "a"), ("a", "v")}
    assert len(build_follow_graph([])) == 0


def test_follow_graph_matches_row_scan():
    rng = np.random.default_rng(0)
    tables = [random_history(rng, 150, 200) for _ in range(2)]
    expected = set()
    for t in tables:
        for v, a, f in zip(t["engaging_user_id"], t["engaged_with_user_id"],
                           t["engagee_follows_engager"]):
            expected.add((v, a))
            if f:
                expected.add((a, v))
    assert build_follow_graph(tables).pairs() == expected


def test_second_degree_examples():
    chain = DirectedEdgeSet.from_pairs(["a", "b"], ["b", "c"])
    assert ("a", "c") in second_degree(chain).pairs()
    cycle = DirectedEdgeSet.from_pairs(["a", "b"], ["b", "a"])
    assert second_degree(cycle).pairs() == {("a", "a"), ("b", "b")}


def test_second_degree_matches_triple_loop():
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(2, 60))
        edges = random_graph(rng, n, int(rng.integers(1, 3 * n)))
        assert second_degree(edges).pairs() == triple_loop(edges)


def test_engagement_graph_counts_match_group_by():
    rng = np.random.default_rng(2)
    history = random_history(rng, 2000)
    for kind in TARGETS:
        expected = Counter((v, a) for v, a, y in zip(history["engaging_user_id"],
                                                     history["engaged_with_user_id"], history[kind])
                           if y)
        assert build_engagement_graph(history, kind).count_map(kind) == dict(expected)
    empty = pairs_table(["v"], ["a"], [False])
    assert len(build_engagement_graph(empty, "like")) == 0


def brute_graph_features(table, history):
    counts = {k: Counter() for k in TARGETS}
    for i in range(history.row_count):
        for k in TARGETS:
            if history[k][i]:
                counts[k][(history["engaging_user_id"][i], history["engaged_with_user_id"][i])] += 1
    out = defaultdict(list)
    for v, a in zip(table["engaging_user_id"], table["engaged_with_user_id"]):
        for k in TARGETS:
            hit = {p for p, c in counts[k].items() if c > 0}
            middles = {p[1] for p in hit}
            out[f"graph_engaging_count_{k}_from_engaged_1d"].append(counts[k][(v, a)])
            out[f"graph_engaged_count_{k}_from_engaging_1d"].append(counts[k][(a, v)])
            out[f"graph_engaging_count_{k}_from_engaged_2d"].append(
                sum(1 for b in middles if (v, b) in hit and (b, a) in hit))
            out[f"graph_engaged_count_{k}_from_engaging_2d"].append(
                sum(1 for b in middles if (a, b) in hit and (b, v) in hit))
    return out


def test_annotated_counts_match_brute_force():
    rng = np.random.default_rng(3)
    history = random_history(rng, 600, 25)
    target = random_history(rng, 200, 30)
    out = annotate_graph_features(target, build_follow_graph([target]),
                                  build_engagement_graphs(history))
    for name, values in brute_graph_features(target, history).items():
        assert out[name].tolist() == values, name


def test_second_degree_follow_flags_match_oracle():
    rng = np.random.default_rng(4)
    target = random_history(rng, 300, 40)
    follow = build_follow_graph([target])
    two = triple_loop(follow)
    out = annotate_graph_features(target, follow, build_engagement_graphs(target))
    pairs = list(zip(target["engaging_user_id"], target["engaged_with_user_id"]))
    assert out["graph_engager_follows_engagee_2d"].tolist() == [int(p in two) for p in pairs]
    assert out["graph_engagee_follows_engager_2d"].tolist() == [int((a, v) in two) for v, a in pairs]


def test_isolated_pair_has_zero_features():
    history = pairs_table(["x"], ["y"], [False], {k: [1] for k in TARGETS})
    target = pairs_table(["p"], ["q"], [False])
    out = annotate_graph_features(target, DirectedEdgeSet.from_pairs([], []),
                                  build_engagement_graphs(history))
    assert all(out[name][0] == 0 for name in GRAPH_FEATURES)


def test_flags_equal_positive_counts(encoded_corpus):
    out = graph_stage(encoded_corpus, [encoded_corpus], encoded_corpus)
    engagement = [n for n in GRAPH_FEATURES if "_flag_" in n]
    assert len(engagement) == 20
    for flag in engagement:
        count = flag.replace("_flag_", "_count_")
        assert np.array_equal(out[flag], (out[count] >= 1).astype(np.int64))


def test_follower_ratios():
    table = ColumnTable({"engaged_with_user_follower_count": [100, 7, 5],
                         "engaging_user_follower_count": [50, 0, 5],
                         "engaged_with_user_following_count": [1, 1, 1],
                         "engaging_user_following_count": [1, 1, 1]})
    out = follower_ratios(table)
    assert out["ratio_engaged_to_engaging_follower_counts"].tolist() == pytest.approx([2.0, 0.0, 1.0])
