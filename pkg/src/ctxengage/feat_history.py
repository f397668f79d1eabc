"""Engagement-history features: user, element and language counts plus ratios."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .feat_graph import safe_ratio
from .feat_time import ELEMENT_COLUMNS
from .registry import (ELEMENTS, FEATURES, KEY_COLUMNS, LANGUAGE_RATIO_FEATURES, ORACLE_FEATURES,
                       POLARITIES, TARGETS)
from .table import ColumnTable, ColumnType

DAY = 86400
HISTORY_DAYS = 3


@dataclass(frozen=True)
class HistorySplit:
    history: ColumnTable
    remainder: ColumnTable
    mode: str  # "train_first3days" or "whole_train_for_holdout"


def _check_train_span(train: ColumnTable) -> int:
    if train.row_count == 0:
        raise ValueError("the train table is empty")
    days = train["tweet_timestamp"] // DAY
    first = int(days.min())
    if int(days.max()) - first + 1 < 7:
        raise ValueError("the train table must span at least 7 UTC days")
    return first


def designate_history(train: ColumnTable, target: ColumnTable, target_source: str) -> HistorySplit:
    first_day = _check_train_span(train)
    if target_source == "train":
        early = train["tweet_timestamp"] // DAY < first_day + HISTORY_DAYS
        return HistorySplit(train.filter(early), train.filter(~early), "train_first3days")
    if target_source in ("val", "test", "val+test"):
        return HistorySplit(train, target, "whole_train_for_holdout")
    raise ValueError(f"unknown source {target_source!r}")


def _joint_codes(history_keys: Sequence, target_keys: Sequence) -> tuple[np.ndarray, np.ndarray, int]:
    lookup: dict = {}
    hist = np.fromiter((lookup.setdefault(k, len(lookup)) for k in history_keys), np.int64,
                       count=len(history_keys))
    targ = np.fromiter((lookup.setdefault(k, len(lookup)) for k in target_keys), np.int64,
                       count=len(target_keys))
    return hist, targ, len(lookup)


def _grouped_sum(history_keys, weights, target_keys) -> np.ndarray:
    hist, targ, size = _joint_codes(history_keys, target_keys)
    sums = np.bincount(hist, weights=np.asarray(weights, dtype=np.float64), minlength=size)
    return sums[targ].astype(np.int64) if len(targ) else np.zeros(0, np.int64)


def user_engagement_counts(history: ColumnTable, target: ColumnTable) -> dict[str, np.ndarray]:
    out = {}
    for side, column in (("engaging", "engaging_user_id"), ("engaged_with", "engaged_with_user_id")):
        hist_keys, targ_keys = history[column].tolist(), target[column].tolist()
        total = _grouped_sum(hist_keys, np.ones(history.row_count), targ_keys)
        for kind in TARGETS:
            positive = _grouped_sum(hist_keys, history[kind], targ_keys)
            out[f"{side}_count_positive_tweet_{kind}"] = positive
            out[f"{side}_count_negative_tweet_{kind}"] = total - positive
        out[f"{side}_count_all_tweets"] = total
    return out


class _ElementIndex:
    """Inverted index from (optional group, element) to sorted history row numbers."""

    def __init__(self, sets: np.ndarray, groups: np.ndarray | None):
        postings: dict = {}
        for row, elems in enumerate(sets):
            g = None if groups is None else groups[row]
            for e in elems:
                postings.setdefault((g, e), []).append(row)
        self.postings = {k: np.asarray(v, dtype=np.int64) for k, v in postings.items()}

    def rows(self, group, elems) -> np.ndarray:
        hits = [self.postings[(group, e)] for e in elems if (group, e) in self.postings]
        if not hits:
            return np.zeros(0, dtype=np.int64)
        if len(hits) == 1:
            return hits[0]
        return np.unique(np.concatenate(hits))


def element_proxy_counts(history: ColumnTable, target: ColumnTable) -> dict[str, np.ndarray]:
    """Counts of history rows whose element set intersects the target row's set."""
    labels = np.column_stack([np.asarray(history[k], dtype=np.int64) for k in TARGETS]) \
        if history.row_count else np.zeros((0, len(TARGETS)), dtype=np.int64)
    n = target.row_count
    out = {}
    hist_viewers = history["engaging_user_id"]
    targ_viewers = target["engaging_user_id"]
    for element in ELEMENTS:
        column = ELEMENT_COLUMNS[element]
        hist_sets, targ_sets = history[column], target[column]
        for scope, index, groups in (
                ("count", _ElementIndex(hist_sets, None), None),
                ("user_proxy_count", _ElementIndex(hist_sets, hist_viewers), targ_viewers)):
            totals = np.zeros(n, dtype=np.int64)
            positives = np.zeros((n, len(TARGETS)), dtype=np.int64)
            cache: dict = {}
            for i, elems in enumerate(targ_sets):
                if not elems:
                    continue
                key = (None if groups is None else groups[i], elems)
                hit = cache.get(key)
                if hit is None:
                    rows = index.rows(key[0], elems)
                    hit = (len(rows), labels[rows].sum(axis=0))
                    cache[key] = hit
                totals[i], positives[i] = hit
            for j, kind in enumerate(TARGETS):
                out[f"{element}_{scope}_positive_tweets_{kind}"] = positives[:, j].copy()
                out[f"{element}_{scope}_negative_tweets_{kind}"] = totals - positives[:, j]
            if scope == "count":
                out[f"{element}_count_all_tweets"] = totals
    return out


def language_history(history: ColumnTable, target: ColumnTable) -> dict[str, np.ndarray]:
    out = {}
    for name, column in (("this_language_seen_count", "engaging_user_id"),
                         ("this_language_authored_count", "engaged_with_user_id")):
        hist_keys = list(zip(history[column].tolist(), history["language"].tolist()))
        targ_keys = list(zip(target[column].tolist(), target["language"].tolist()))
        out[name] = _grouped_sum(hist_keys, np.ones(history.row_count), targ_keys)
    return out


def ratio_features(counts: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = {}
    for side in ("engaging", "engaged_with"):
        for pol in POLARITIES:
            for kind in TARGETS:
                out[f"ratio_all_to_{side}_count_{pol}_tweets_{kind}"] = safe_ratio(
                    counts[f"{side}_count_{pol}_tweet_{kind}"], counts[f"{side}_count_all_tweets"])
    for element in ELEMENTS:
        total = counts[f"{element}_count_all_tweets"]
        for scope in ("count", "user_proxy_count"):
            for pol in POLARITIES:
                for kind in TARGETS:
                    out[f"ratio_all_to_{element}_{scope}_{pol}_tweets_{kind}"] = safe_ratio(
                        counts[f"{element}_{scope}_{pol}_tweets_{kind}"], total)
    seen, authored = LANGUAGE_RATIO_FEATURES
    out[seen] = safe_ratio(counts["this_language_seen_count"], counts["engaging_count_all_tweets"])
    out[authored] = safe_ratio(counts["this_language_authored_count"],
                               counts["engaged_with_count_all_tweets"])
    return out


def engagement_stage(train: ColumnTable, target: ColumnTable, target_source: str) -> ColumnTable:
    """Output of the Engagement_ stage: row ids of the remainder plus history features."""
    split = designate_history(train, target, target_source)
    history, rows = split.history, split.remainder
    counts: dict[str, np.ndarray] = {}
    counts.update(user_engagement_counts(history, rows))
    counts.update(element_proxy_counts(history, rows))
    counts.update(language_history(history, rows))
    ratios = ratio_features(counts)
    cols = {"row_id": rows["row_id"], **counts, **ratios}
    types = {k: ColumnType.INT for k in counts}
    types.update({k: ColumnType.FLOAT for k in ratios})
    types["row_id"] = ColumnType.INT
    return ColumnTable(cols, types, row_count=rows.row_count)


LABELS = list(TARGETS)
FINAL_COLUMNS = KEY_COLUMNS + LABELS + FEATURES + ORACLE_FEATURES


def merge_final(encoding: ColumnTable, others: Sequence[ColumnTable]) -> ColumnTable:
    """Join the stage outputs on row_id, keeping the rows of the last (engagement) table.

    ``others`` holds the graph, time and engagement stage outputs; each carries
    ``row_id`` plus only its own columns.
    """
    if not others:
        raise ValueError("nothing to merge")
    parts = [encoding, *others]
    seen: dict[str, int] = {}
    for i, part in enumerate(parts):
        for name in part.names:
            if name == "row_id":
                continue
            if name in seen:
                raise ValueError(f"column {name!r} appears in more than one stage output")
            seen[name] = i
    row_ids = others[-1]["row_id"]
    positions = []
    for part in parts:
        where = {int(r): i for i, r in enumerate(part["row_id"])}
        try:
            positions.append(np.fromiter((where[int(r)] for r in row_ids), np.int64, len(row_ids)))
        except KeyError as exc:
            raise ValueError(f"row id {exc.args[0]} is missing from a stage output") from None
    cols, types = {}, {}
    for name in FINAL_COLUMNS:
        if name == "row_id":
            cols[name], types[name] = row_ids, ColumnType.INT
            continue
        if name not in seen:
            raise ValueError(f"no stage output provides column {name!r}")
        part = parts[seen[name]]
        values = part[name][positions[seen[name]]]
        kind = part.type_of(name)
        if kind is ColumnType.BOOL:
            values, kind = values.astype(np.int64), ColumnType.INT
        cols[name], types[name] = values, kind
    return ColumnTable(cols, types, row_count=len(row_ids))
