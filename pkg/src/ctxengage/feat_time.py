"""Sliding-window trend features and their whole-table "oracle" counterparts.

A row at time ``t`` counts the other rows with timestamps in ``[t - w, t)``,
so rows sharing a timestamp never count toward each other.  Counting is done
per key on time-sorted rows: every (key, time) pair is packed into one sortable
integer and the window bounds are located by binary search.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .registry import ELEMENTS, WINDOW_SECONDS, WINDOW_SUFFIXES
from .table import ColumnTable, ColumnType

HISTORY_SPAN = 172800
HISTORY_FLAG = "history_only"
ELEMENT_COLUMNS = {"hashtags": "hashtags", "links": "present_links", "domains": "present_domains"}


@dataclass(frozen=True)
class WindowSpec:
    windows: tuple[int, ...] = WINDOW_SECONDS
    suffixes: tuple[str, ...] = WINDOW_SUFFIXES

    def __post_init__(self):
        if len(self.windows) != len(self.suffixes):
            raise ValueError("every window needs a suffix")
        if any(b <= a for a, b in zip(self.windows, self.windows[1:])):
            raise ValueError("windows must be strictly increasing")


DEFAULT_WINDOWS = WindowSpec()


def _codes(values) -> np.ndarray:
    """Dense integer codes for arbitrary hashable values."""
    lookup: dict = {}
    return np.fromiter((lookup.setdefault(v, len(lookup)) for v in values), dtype=np.int64,
                       count=len(values))


class _KeyedTimes:
    """Sorted (key, time) pairs supporting 'how many pairs of key k lie in [lo, hi)'."""

    def __init__(self, keys: np.ndarray, times: np.ndarray, max_window: int):
        times = np.asarray(times, dtype=np.int64)
        self.offset = (int(times.min()) if len(times) else 0) - max_window - 1
        shifted = times - self.offset
        self.base = int(shifted.max()) + max_window + 2 if len(times) else 1
        self.packed = np.sort(np.asarray(keys, dtype=np.int64) * self.base + shifted)

    def count(self, keys: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        k = np.asarray(keys, dtype=np.int64) * self.base
        left = np.searchsorted(self.packed, k + (np.asarray(lo) - self.offset), side="left")
        right = np.searchsorted(self.packed, k + (np.asarray(hi) - self.offset), side="left")
        return right - left

    def total(self, keys: np.ndarray) -> np.ndarray:
        k = np.asarray(keys, dtype=np.int64) * self.base
        return (np.searchsorted(self.packed, k + self.base, side="left")
                - np.searchsorted(self.packed, k, side="left"))


def windowed_key_counts(keys: np.ndarray, ts: np.ndarray, spec: WindowSpec = DEFAULT_WINDOWS):
    """Per window, the number of other rows with the same key in [t - w, t)."""
    ts = np.asarray(ts, dtype=np.int64)
    index = _KeyedTimes(keys, ts, max(spec.windows))
    return [index.count(keys, ts - w, ts) for w in spec.windows]


def _explode(sets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(s) for s in sets), dtype=np.int64, count=len(sets))
    rows = np.repeat(np.arange(len(sets), dtype=np.int64), lengths)
    flat = [e for s in sets for e in s]
    return rows, _codes(flat) if flat else np.zeros(0, dtype=np.int64)


def _pair_keys(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return _codes(list(zip(first.tolist(), second.tolist())))


def windowed_element_counts(sets: np.ndarray, ts: np.ndarray, group: np.ndarray | None = None,
                            spec: WindowSpec = DEFAULT_WINDOWS):
    """Per window, sum over the row's elements of prior rows (same group) containing it."""
    n = len(sets)
    ts = np.asarray(ts, dtype=np.int64)
    rows, elems = _explode(sets)
    if len(rows) == 0:
        return [np.zeros(n, dtype=np.int64) for _ in spec.windows]
    keys = elems if group is None else _pair_keys(np.asarray(group)[rows], elems)
    pair_ts = ts[rows]
    index = _KeyedTimes(keys, pair_ts, max(spec.windows))
    out = []
    for w in spec.windows:
        per_pair = index.count(keys, pair_ts - w, pair_ts)
        out.append(np.bincount(rows, weights=per_pair, minlength=n).astype(np.int64))
    return out


def view_counts(table: ColumnTable, spec: WindowSpec = DEFAULT_WINDOWS) -> ColumnTable:
    ts = table["tweet_timestamp"]
    cols = {}
    for prefix, key in (("engaging_saw_tweets_count", "engaging_user_id"),
                        ("engageds_tweets_views_count", "engaged_with_user_id")):
        for suffix, values in zip(spec.suffixes, windowed_key_counts(_codes(table[key]), ts, spec)):
            cols[f"{prefix}_{suffix}"] = values
    return table.with_columns(cols, {k: ColumnType.INT for k in cols})


def element_frequency(table: ColumnTable, element: str,
                      spec: WindowSpec = DEFAULT_WINDOWS) -> ColumnTable:
    if element not in ELEMENT_COLUMNS:
        raise ValueError(f"unknown element column {element!r}")
    sets = table[ELEMENT_COLUMNS[element]]
    ts = table["tweet_timestamp"]
    viewers = _codes(table["engaging_user_id"])
    cols = {}
    for suffix, values in zip(spec.suffixes, windowed_element_counts(sets, ts, None, spec)):
        cols[f"{element}_frequency_{suffix}"] = values
    for suffix, values in zip(spec.suffixes, windowed_element_counts(sets, ts, viewers, spec)):
        cols[f"user_{element}_frequency_{suffix}"] = values
    return table.with_columns(cols, {k: ColumnType.INT for k in cols})


def _element_totals(sets: np.ndarray, group: np.ndarray | None) -> np.ndarray:
    n = len(sets)
    rows, elems = _explode(sets)
    if len(rows) == 0:
        return np.zeros(n, dtype=np.int64)
    keys = elems if group is None else _pair_keys(np.asarray(group)[rows], elems)
    occurrences = np.bincount(keys)[keys]
    return np.bincount(rows, weights=occurrences - 1, minlength=n).astype(np.int64)


def oracle_frequencies(table: ColumnTable) -> ColumnTable:
    """Whole-table versions of the trend features, excluding the row itself."""
    viewers = _codes(table["engaging_user_id"])
    authors = _codes(table["engaged_with_user_id"])
    cols = {}
    for element in ELEMENTS:
        cols[f"{element}_frequency"] = _element_totals(table[ELEMENT_COLUMNS[element]], None)
    for element in ELEMENTS:
        cols[f"user_{element}_frequency"] = _element_totals(table[ELEMENT_COLUMNS[element]], viewers)
    cols["engaging_saw_tweets_count"] = (np.bincount(viewers)[viewers] - 1 if len(viewers)
                                         else np.zeros(0, np.int64))
    cols["engageds_tweets_views_count"] = (np.bincount(authors)[authors] - 1 if len(authors)
                                           else np.zeros(0, np.int64))
    return table.with_columns(cols, {k: ColumnType.INT for k in cols})


def prepend_history_48h(train: ColumnTable, target: ColumnTable) -> ColumnTable:
    """Prepend the last 48 hours of ``train`` to ``target``, flagged as history only."""
    tail = train.take(np.zeros(0, dtype=np.int64))
    if train.row_count:
        train_ts = train["tweet_timestamp"]
        cutoff = int(train_ts.max()) - HISTORY_SPAN
        tail = train.filter(train_ts >= cutoff)
        if target.row_count and int(train_ts.max()) >= int(target["tweet_timestamp"].min()):
            raise ValueError("history and target time ranges overlap")
    shared = [n for n in target.names if n in train]
    if shared != target.names:
        missing = sorted(set(target.names) - set(train.names))
        raise ValueError(f"history table lacks columns {missing}")
    tail = tail.select(shared)
    flag = np.concatenate([np.ones(tail.row_count, bool), np.zeros(target.row_count, bool)])
    combined = ColumnTable.concat([tail, target.select(shared)])
    return combined.with_columns({HISTORY_FLAG: flag}, {HISTORY_FLAG: ColumnType.BOOL})


def trend_features(table: ColumnTable, spec: WindowSpec = DEFAULT_WINDOWS) -> ColumnTable:
    out = table
    for element in ELEMENTS:
        out = element_frequency(out, element, spec)
    out = view_counts(out, spec)
    return oracle_frequencies(out)


def time_stage(target: ColumnTable, history: ColumnTable | None = None,
               spec: WindowSpec = DEFAULT_WINDOWS) -> ColumnTable:
    """Output of the Time_ stage: trend features with history-only rows removed."""
    if history is None:
        return trend_features(target, spec)
    augmented = trend_features(prepend_history_48h(history, target), spec)
    keep = ~augmented[HISTORY_FLAG]
    return augmented.filter(keep).drop([HISTORY_FLAG])
