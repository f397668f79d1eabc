"""Subsampling by rows, by key, and by the intersection of two user keys.

All samplers shuffle deterministically and keep a prefix of exact size, so a
smaller percentage always selects a subset of a larger one under the same seed.
Selected rows keep their original relative order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .synthgen import stream
from .table import ColumnTable

SAMPLE_TECHNIQUES = ("random", "EU", "EWU", "inter_EWU+EU", "tweet")
SAMPLE_PERCENTS = (1, 2, 5, 10)
KEY_FOR_TECHNIQUE = {"EU": "engaging_user_id", "EWU": "engaged_with_user_id", "tweet": "tweet_id"}


@dataclass(frozen=True)
class SamplePlan:
    technique: str
    percent: int
    seed: int = 0

    def __post_init__(self):
        if self.technique not in SAMPLE_TECHNIQUES:
            raise ValueError(f"unknown sampling technique {self.technique!r}")
        if self.percent not in SAMPLE_PERCENTS:
            raise ValueError(f"percent must be one of {SAMPLE_PERCENTS}")


def _check_percent(percent) -> None:
    if not 0 < percent <= 100:
        raise ValueError("percent must lie in (0, 100]")


def sample_random(table: ColumnTable, percent: int, seed: int) -> ColumnTable:
    _check_percent(percent)
    if table.row_count == 0:
        raise ValueError("cannot sample an empty table")
    size = table.row_count * percent // 100
    order = stream(seed, "sample:rows").permutation(table.row_count)
    return table.take(np.sort(order[:size]))


def _sampled_ids(values: np.ndarray, count_fn, seed: int, label: str) -> np.ndarray:
    ids = np.unique(values)
    if len(ids) == 0:
        raise ValueError(f"no ids in column {label!r}")
    size = count_fn(len(ids))
    order = stream(seed, f"sample:{label}").permutation(len(ids))
    return ids[order[:size]]


def sample_by_key(table: ColumnTable, key: str, percent: int, seed: int) -> ColumnTable:
    """Sample ``percent`` of the distinct ``key`` values and keep all of their rows."""
    _check_percent(percent)
    if key not in table:
        raise KeyError(f"no column named {key!r}")
    chosen = _sampled_ids(table[key], lambda n: n * percent // 100, seed, key)
    return table.filter(np.isin(table[key], chosen))


def inter_id_count(n_ids: int, percent: int) -> int:
    """floor(sqrt(percent / 100) * n_ids), computed exactly."""
    return math.isqrt(percent * n_ids * n_ids) // 10


def inter_sampled_ids(table: ColumnTable, percent: int, seed: int) -> dict[str, np.ndarray]:
    """The author and viewer id sets drawn by :func:`sample_inter`."""
    _check_percent(percent)
    chosen = {}
    for key in ("engaged_with_user_id", "engaging_user_id"):
        if key not in table:
            raise KeyError(f"no column named {key!r}")
        chosen[key] = _sampled_ids(table[key], lambda n: inter_id_count(n, percent), seed, key)
    return chosen


def sample_inter(table: ColumnTable, percent: int, seed: int) -> ColumnTable:
    """Sample sqrt(percent) of both user id sets and keep rows where both were drawn."""
    chosen = inter_sampled_ids(table, percent, seed)
    mask = np.ones(table.row_count, dtype=bool)
    for key, ids in chosen.items():
        mask &= np.isin(table[key], ids)
    return table.filter(mask)


def apply_plan(table: ColumnTable, plan: SamplePlan) -> ColumnTable:
    if plan.technique == "random":
        return sample_random(table, plan.percent, plan.seed)
    if plan.technique == "inter_EWU+EU":
        return sample_inter(table, plan.percent, plan.seed)
    return sample_by_key(table, KEY_FOR_TECHNIQUE[plan.technique], plan.percent, plan.seed)


def ratio_report(table: ColumnTable) -> dict[str, float]:
    if table.row_count == 0:
        raise ValueError("ratios are undefined for an empty table")
    n = table.row_count
    return {
        "viewers_per_row": len(np.unique(table["engaging_user_id"])) / n,
        "authors_per_row": len(np.unique(table["engaged_with_user_id"])) / n,
        "tweets_per_row": len(np.unique(table["tweet_id"])) / n,
    }
