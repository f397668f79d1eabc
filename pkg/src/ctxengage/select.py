"""Categorisation (string indexing, quantile binning), chi-squared scoring,
top-k selection and assembly of feature vectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .registry import (FEATURES, KEY_COLUMNS, ORACLE_FEATURES, STRING_FEATURES, TARGETS,
                       UNBINNED_FEATURES, categorised_name, feature_set)
from .table import ColumnTable, ColumnType

TOP_KS = (5, 10, 25, 50)
FEATURE_SELECTIONS = ("top_5", "top_10", "top_25", "top_50", "all")
FEATURE_NOTES = ("scaled", "oracle_scaled")
DEFAULT_BINS = 100


def string_index(column: Sequence[str]) -> tuple[np.ndarray, dict[str, int]]:
    """Codes by descending frequency, ties broken by the value's lexicographic order."""
    values, counts = np.unique(np.asarray(column, dtype=object), return_counts=True)
    order = sorted(range(len(values)), key=lambda i: (-counts[i], values[i]))
    mapping = {values[i]: code for code, i in enumerate(order)}
    codes = np.fromiter((mapping[v] for v in column), dtype=np.int64, count=len(column))
    return codes, mapping


def quantile_cuts(values: np.ndarray, nbins: int = DEFAULT_BINS) -> np.ndarray:
    """Nearest-rank quantiles at i/nbins, de-duplicated, excluding the minimum."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if len(x) == 0:
        return np.zeros(0)
    n = len(x)
    ranks = np.ceil(np.arange(1, nbins) * n / nbins).astype(np.int64) - 1
    cuts = np.unique(x[np.clip(ranks, 0, n - 1)])
    return cuts[cuts > x[0]]


def quantile_bin(column, nbins: int = DEFAULT_BINS) -> tuple[np.ndarray, np.ndarray]:
    """Bin index = number of cut points <= value."""
    values = np.asarray(column, dtype=np.float64)
    cuts = quantile_cuts(values, nbins)
    return np.searchsorted(cuts, values, side="right").astype(np.int64), cuts


def categorise_column(name: str, column: np.ndarray, nbins: int = DEFAULT_BINS):
    """Return (new name, values, description of the transform)."""
    new_name = categorised_name(name)
    if name in STRING_FEATURES:
        codes, mapping = string_index(column.tolist())
        return new_name, codes, {"kind": "indexed", "mapping": mapping}
    values = np.asarray(column)
    if name in UNBINNED_FEATURES:
        return new_name, values.astype(np.int64), {"kind": "unchanged"}
    if len(np.unique(values)) <= nbins:
        return new_name, values, {"kind": "passthrough"}
    binned, cuts = quantile_bin(values, nbins)
    return new_name, binned, {"kind": "binned", "cuts": cuts.tolist()}


def categorise(final: ColumnTable, nbins: int = DEFAULT_BINS) -> tuple[ColumnTable, dict]:
    """Categorised_ table: keys, labels, and every registry/oracle feature categorised."""
    cols = {k: final[k] for k in KEY_COLUMNS + list(TARGETS)}
    types = {k: final.type_of(k) for k in cols}
    transforms = {}
    for name in FEATURES + ORACLE_FEATURES:
        new_name, values, info = categorise_column(name, final[name], nbins)
        cols[new_name] = values
        types[new_name] = ColumnType.FLOAT if values.dtype == np.float64 else ColumnType.INT
        transforms[new_name] = info
    return ColumnTable(cols, types, row_count=final.row_count), transforms


def chi_square(feature, label) -> float:
    """Sum over classes and categories of (O - E)^2 / E with E = count(f=v) * P(c)."""
    f = np.asarray(feature)
    c = np.asarray(label)
    if len(f) != len(c) or len(f) == 0:
        raise ValueError("feature and label must be non-empty and of equal length")
    classes, class_idx = np.unique(c, return_inverse=True)
    if len(classes) < 2:
        raise ValueError("chi-squared selection needs at least two observed classes")
    cats, cat_idx = np.unique(f, return_inverse=True)
    n = len(f)
    observed = np.zeros((len(cats), len(classes)), dtype=np.int64)
    np.add.at(observed, (cat_idx, class_idx), 1)
    cat_total = observed.sum(axis=1)
    class_total = observed.sum(axis=0)
    expected = np.outer(cat_total, class_total).astype(np.float64) / n
    return float((((observed - expected) ** 2) / expected).sum())


def chi_square_scores(frame: ColumnTable, target: str, names: Sequence[str]) -> dict[str, float]:
    label = frame[target]
    return {name: chi_square(frame[name], label) for name in names}


def select_top_k(scores: Mapping[str, float], k: int, candidates: Sequence[str]) -> list[str]:
    """``k`` candidates by descending score; ties keep the candidates' order."""
    if k > len(candidates):
        raise ValueError(f"cannot select {k} of {len(candidates)} features")
    order = sorted(range(len(candidates)), key=lambda i: (-scores[candidates[i]], i))
    return [candidates[i] for i in order[:k]]


def vector_name(selection: str, note: str, target: str) -> str:
    return f"ev__{selection}__{note}__{target}__sdotd"


def selections_for(train_frame: ColumnTable, targets: Sequence[str] = TARGETS,
                   notes: Sequence[str] = FEATURE_NOTES,
                   top_ks: Sequence[int] = TOP_KS) -> tuple[dict[str, list[str]], dict]:
    """Feature lists for every vector column, scored on ``train_frame`` only."""
    selections: dict[str, list[str]] = {}
    all_scores: dict = {}
    for note in notes:
        candidates = [categorised_name(n) for n in feature_set(note)]
        for target in targets:
            scores = chi_square_scores(train_frame, target, candidates)
            all_scores[(note, target)] = scores
            for k in top_ks:
                selections[vector_name(f"top_{k}", note, target)] = select_top_k(scores, k, candidates)
            selections[vector_name("all", note, target)] = list(candidates)
    return selections, all_scores


@dataclass
class FeatureFrame:
    """Dense feature matrix with labels and named feature vectors."""

    names: list[str]
    matrix: np.ndarray
    labels: dict[str, np.ndarray]
    row_ids: np.ndarray
    vectors: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("feature matrix contains missing or non-finite values")
        self._position = {n: i for i, n in enumerate(self.names)}

    @classmethod
    def from_table(cls, table: ColumnTable, names: Sequence[str] | None = None) -> "FeatureFrame":
        if names is None:
            skip = set(KEY_COLUMNS) | set(TARGETS)
            names = [n for n in table.names if n not in skip]
        matrix = np.column_stack([np.asarray(table[n], dtype=np.float64) for n in names]) \
            if names else np.zeros((table.row_count, 0))
        labels = {t: np.asarray(table[t], dtype=np.int64) for t in TARGETS if t in table}
        return cls(list(names), matrix, labels, np.asarray(table["row_id"]))

    def columns(self, names: Sequence[str]) -> np.ndarray:
        unknown = [n for n in names if n not in self._position]
        if unknown:
            raise KeyError(f"unknown feature names: {unknown[:5]}")
        return self.matrix[:, [self._position[n] for n in names]]

    def vector(self, name: str) -> np.ndarray:
        return self.columns(self.vectors[name])


def vectorise(frame: FeatureFrame, selections: Mapping[str, Sequence[str]]) -> FeatureFrame:
    for name, chosen in selections.items():
        frame.columns(chosen)  # validates names
        frame.vectors[name] = list(chosen)
    return frame
