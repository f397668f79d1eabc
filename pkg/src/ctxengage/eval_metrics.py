"""Entropy, cross-entropy, RCE and PRAUC as used for ranking challenge entries."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EPS = 1e-15
EVAL_COLUMNS = ("metric", "target", "algorithm", "note", "feature_selection", "trained_on",
                "evaluated_on", "value")


def entropy(probabilities: Sequence[float]) -> float:
    """Shannon entropy in nats, with 0 * ln 0 taken as 0."""
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("entropy needs a non-empty probability list")
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(math.fsum(p.tolist()) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {math.fsum(p.tolist())!r}, not 1")
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


@dataclass(frozen=True)
class Choice:
    """A choice node: each branch has a probability and an optional sub-choice."""

    branches: tuple[tuple[float, "Choice | None"], ...]

    def leaves(self) -> list[float]:
        out = []
        for p, child in self.branches:
            out.extend([p] if child is None else [p * q for q in child.leaves()])
        return out


def tree_entropy(choice: Choice) -> float:
    """H of the branch choice plus the probability-weighted H of each sub-choice."""
    total = entropy([p for p, _ in choice.branches])
    for p, child in choice.branches:
        if child is not None:
            total += p * tree_entropy(child)
    return total


def decomposition_check(choice: Choice, expected: float | None = None, tol: float = 1e-6) -> bool:
    """True when the decomposed entropy equals the entropy of the flattened outcomes."""
    value = tree_entropy(choice)
    flat = entropy(choice.leaves())
    if abs(value - flat) > tol:
        return False
    return expected is None or abs(value - expected) <= tol


def _labels_preds(labels, preds) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(labels, dtype=np.float64)
    p = np.asarray(preds, dtype=np.float64)
    if y.shape != p.shape or y.ndim != 1:
        raise ValueError("labels and predictions must be 1-d and of equal length")
    if len(y) == 0:
        raise ValueError("empty input")
    return y, p


def cross_entropy(labels, preds) -> float:
    y, p = _labels_preds(labels, preds)
    p = np.clip(p, EPS, 1 - EPS)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def ctr(labels) -> float:
    y = np.asarray(labels, dtype=np.float64)
    if len(y) == 0:
        raise ValueError("empty input")
    return float(y.sum() / len(y))


def rce(labels, preds) -> float:
    """Percent improvement in cross-entropy over predicting the labels' own CTR."""
    y, p = _labels_preds(labels, preds)
    rate = ctr(y)
    if rate in (0.0, 1.0):
        raise ValueError("RCE is undefined when only one class is present")
    straw = cross_entropy(y, np.full_like(y, rate))
    return (1.0 - cross_entropy(y, p) / straw) * 100.0


@dataclass(frozen=True)
class PRCurve:
    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray


def pr_curve(labels, scores) -> PRCurve:
    """Points ordered by decreasing recall, ending with (0, 1)."""
    y, s = _labels_preds(labels, scores)
    if y.sum() == 0:
        raise ValueError("precision-recall curve needs at least one positive label")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    ends = np.r_[np.flatnonzero(np.diff(s)), len(s) - 1]
    tps = np.cumsum(y)[ends]
    fps = ends + 1 - tps
    precision = tps / (tps + fps)
    recall = tps / tps[-1]
    last = int(np.searchsorted(tps, tps[-1]))
    keep = slice(last, None, -1)
    return PRCurve(np.r_[recall[keep], 0.0], np.r_[precision[keep], 1.0], s[ends][keep])


def prauc(labels, scores) -> float:
    curve = pr_curve(labels, scores)
    r, p = curve.recall, curve.precision
    return float(np.sum((r[:-1] - r[1:]) * (p[:-1] + p[1:]) / 2.0))


@dataclass(frozen=True)
class EvalRow:
    metric: str
    target: str
    algorithm: str
    note: str
    feature_selection: str
    trained_on: str
    evaluated_on: str
    value: float


def write_evaluations(rows: Iterable[EvalRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(EVAL_COLUMNS)
        for row in rows:
            writer.writerow([row.metric, row.target, row.algorithm, row.note, row.feature_selection,
                             row.trained_on, row.evaluated_on, repr(float(row.value))])
    tmp.replace(path)


def read_evaluations(path: str | Path) -> list[EvalRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if tuple(header or ()) != EVAL_COLUMNS:
            raise ValueError(f"{path}: unexpected evaluation header {header}")
        return [EvalRow(*r[:7], float(r[7])) for r in reader if r]
