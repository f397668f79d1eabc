"""Follow and engagement graphs and the graph features derived from them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .registry import TARGETS
from .table import ColumnTable, ColumnType


@dataclass(frozen=True)
class DirectedEdgeSet:
    """Unique (src, dst) user pairs, sorted, with optional per-type counts."""

    src: np.ndarray
    dst: np.ndarray
    counts: Mapping[str, np.ndarray] | None = field(default=None)

    @classmethod
    def from_pairs(cls, src, dst, counts: Mapping[str, Sequence[int]] | None = None):
        src = np.asarray(src, dtype=object)
        dst = np.asarray(dst, dtype=object)
        if len(src) == 0:
            empty = np.zeros(0, dtype=object)
            return cls(empty, empty.copy(), None if counts is None else
                       {k: np.zeros(0, np.int64) for k in counts})
        keys = np.array([f"{s}\x00{d}" for s, d in zip(src, dst)], dtype=object)
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        out_counts = None
        if counts is not None:
            out_counts = {k: np.bincount(inverse, weights=np.asarray(v, dtype=np.int64),
                                         minlength=len(uniq)).astype(np.int64)
                          for k, v in counts.items()}
        return cls(src[first], dst[first], out_counts)

    def __len__(self) -> int:
        return len(self.src)

    def pairs(self) -> set[tuple[str, str]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def count_map(self, kind: str) -> dict[tuple[str, str], int]:
        if self.counts is None:
            raise ValueError("this edge set carries no counts")
        return {(s, d): int(c) for s, d, c in zip(self.src, self.dst, self.counts[kind])}


class _UserIndex:
    def __init__(self, *id_arrays: Iterable):
        ids = sorted({u for arr in id_arrays for u in arr})
        self.ids = ids
        self.code = {u: i for i, u in enumerate(ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def codes(self, values) -> np.ndarray:
        return np.fromiter((self.code[v] for v in values), dtype=np.int64, count=len(values))


def _adjacency(edges: DirectedEdgeSet, index: _UserIndex, weights=None) -> sparse.csr_matrix:
    n = len(index)
    data = np.ones(len(edges), dtype=np.int64) if weights is None else np.asarray(weights, np.int64)
    return sparse.csr_matrix((data, (index.codes(edges.src), index.codes(edges.dst))), shape=(n, n))


def build_follow_graph(tables: Sequence[ColumnTable]) -> DirectedEdgeSet:
    """Viewer follows author for every row; author follows viewer when any row says so."""
    src, dst = [], []
    for t in tables:
        viewers, authors = t["engaging_user_id"], t["engaged_with_user_id"]
        src.append(viewers)
        dst.append(authors)
        flag = np.asarray(t["engagee_follows_engager"], dtype=bool)
        src.append(authors[flag])
        dst.append(viewers[flag])
    if not src:
        return DirectedEdgeSet.from_pairs([], [])
    return DirectedEdgeSet.from_pairs(np.concatenate(src), np.concatenate(dst))


def second_degree(edges: DirectedEdgeSet) -> DirectedEdgeSet:
    """All (a, c) with some b such that (a, b) and (b, c) are edges; a == c is kept."""
    if len(edges) == 0:
        return DirectedEdgeSet.from_pairs([], [])
    index = _UserIndex(edges.src, edges.dst)
    adj = _adjacency(edges, index)
    two = (adj @ adj).tocoo()
    ids = np.asarray(index.ids, dtype=object)
    return DirectedEdgeSet.from_pairs(ids[two.row], ids[two.col])


def build_engagement_graph(history: ColumnTable, kind: str) -> DirectedEdgeSet:
    """Edges viewer -> author weighted by the number of positive ``kind`` rows."""
    if kind not in TARGETS:
        raise ValueError(f"unknown engagement type {kind!r}")
    positive = np.asarray(history[kind]) == 1
    viewers = history["engaging_user_id"][positive]
    authors = history["engaged_with_user_id"][positive]
    return DirectedEdgeSet.from_pairs(viewers, authors, {kind: np.ones(len(viewers), np.int64)})


def build_engagement_graphs(history: ColumnTable) -> dict[str, DirectedEdgeSet]:
    return {kind: build_engagement_graph(history, kind) for kind in TARGETS}


def _row_dot(left: sparse.csr_matrix, right_t: sparse.csr_matrix, a_idx, b_idx) -> np.ndarray:
    """For each row i: sum_k left[a_i, k] * right_t[b_i, k]."""
    if len(a_idx) == 0:
        return np.zeros(0, dtype=np.int64)
    prod = left[a_idx].multiply(right_t[b_idx])
    return np.asarray(prod.sum(axis=1)).ravel().astype(np.int64)


def annotate_graph_features(table: ColumnTable, follow: DirectedEdgeSet,
                            engagement: Mapping[str, DirectedEdgeSet]) -> ColumnTable:
    missing = [k for k in TARGETS if k not in engagement]
    if missing:
        raise ValueError(f"missing engagement graphs for {missing}")
    viewers, authors = table["engaging_user_id"], table["engaged_with_user_id"]
    index = _UserIndex(viewers, authors, follow.src, follow.dst,
                       *[g.src for g in engagement.values()], *[g.dst for g in engagement.values()])
    v_idx, a_idx = index.codes(viewers), index.codes(authors)
    out: dict[str, np.ndarray] = {}

    adj = _adjacency(follow, index)
    adj_t = adj.T.tocsr()
    # author -> b -> viewer and viewer -> b -> author
    out["graph_engagee_follows_engager_2d"] = (_row_dot(adj, adj_t, a_idx, v_idx) > 0).astype(np.int64)
    out["graph_engager_follows_engagee_2d"] = (_row_dot(adj, adj_t, v_idx, a_idx) > 0).astype(np.int64)

    first: dict[str, np.ndarray] = {}
    second: dict[str, np.ndarray] = {}
    for kind in TARGETS:
        graph = engagement[kind]
        counts = _adjacency(graph, index, graph.counts[kind])
        hit = (counts > 0).astype(np.int64).tocsr()
        hit_t = hit.T.tocsr()
        first[f"engaging_{kind}"] = np.asarray(counts[v_idx, a_idx]).ravel().astype(np.int64)
        first[f"engaged_{kind}"] = np.asarray(counts[a_idx, v_idx]).ravel().astype(np.int64)
        second[f"engaging_{kind}"] = _row_dot(hit, hit_t, v_idx, a_idx)
        second[f"engaged_{kind}"] = _row_dot(hit, hit_t, a_idx, v_idx)

    for degree, values in (("1d", first), ("2d", second)):
        for side, other in (("engaging", "engaged"), ("engaged", "engaging")):
            for kind in TARGETS:
                out[f"graph_{side}_flag_{kind}_from_{other}_{degree}"] = (
                    values[f"{side}_{kind}"] > 0).astype(np.int64)
            for kind in TARGETS:
                out[f"graph_{side}_count_{kind}_from_{other}_{degree}"] = values[f"{side}_{kind}"]
    return table.with_columns(out, {k: ColumnType.INT for k in out})


def safe_ratio(numerator, denominator) -> np.ndarray:
    num = np.asarray(numerator, dtype=np.float64)
    den = np.asarray(denominator, dtype=np.float64)
    out = np.zeros(np.broadcast(num, den).shape, dtype=np.float64)
    np.divide(num, den, out=out, where=den != 0)
    return out


def follower_ratios(table: ColumnTable) -> ColumnTable:
    cols = {
        "ratio_engaged_to_engaging_follower_counts": safe_ratio(
            table["engaged_with_user_follower_count"], table["engaging_user_follower_count"]),
        "ratio_engaged_to_engaging_following_counts": safe_ratio(
            table["engaged_with_user_following_count"], table["engaging_user_following_count"]),
    }
    return table.with_columns(cols, {k: ColumnType.FLOAT for k in cols})


def graph_stage(table: ColumnTable, follow_scope: Sequence[ColumnTable],
                engagement_history: ColumnTable) -> ColumnTable:
    """Output of the GraphBased_ stage for ``table``."""
    follow = build_follow_graph(follow_scope)
    graphs = build_engagement_graphs(engagement_history)
    return follower_ratios(annotate_graph_features(table, follow, graphs))
