"""Balancing of evaluation results and the Friedman / Wilcoxon / Holm test suite."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .eval_metrics import EvalRow
from .ingest import DatasetId
from .registry import TARGETS

log = logging.getLogger(__name__)

METRICS = ("PRAUC", "RCE")
FACTORS = ("algorithm", "note", "feature_selection", "to_technique", "to_percent")
FACTOR_COLUMNS = FACTORS + ("evaluated_on",)
FRIEDMAN_COLUMNS = ("W", "ddof1", "Q", "p-corr")


@dataclass(frozen=True)
class EvalRecord:
    algorithm: str
    note: str
    feature_selection: str
    to_technique: str
    to_percent: int
    evaluated_on: str
    target: str
    PRAUC: float
    RCE: float
    trained_on: str = ""

    def get(self, name: str):
        return getattr(self, name)


def records_from_rows(rows: Iterable[EvalRow]) -> list[EvalRecord]:
    """Pair PRAUC and RCE rows of the same evaluation; unpaired rows are dropped."""
    paired: dict[tuple, dict[str, float]] = {}
    for r in rows:
        key = (r.algorithm, r.note, r.feature_selection, r.trained_on, r.evaluated_on, r.target)
        paired.setdefault(key, {})[r.metric] = r.value
    out = []
    for (alg, note, fs, trained, evaluated, target), metrics in paired.items():
        if not all(m in metrics for m in METRICS):
            log.info("dropping %s/%s on %s: only %s present", alg, target, evaluated, sorted(metrics))
            continue
        trained_id = DatasetId.parse(trained)
        out.append(EvalRecord(alg, note, fs, trained_id.technique, trained_id.percent, evaluated,
                              target, metrics["PRAUC"], metrics["RCE"], trained))
    return out


def _value(row, name):
    return row[name] if isinstance(row, Mapping) else getattr(row, name)


def common_factor_combinations(rows: Sequence, target_factor: str,
                               factors: Sequence[str]) -> list:
    """Rows whose other-factor combination occurs for every value of ``target_factor``."""
    others = [f for f in factors if f != target_factor]
    levels: dict = {}
    for row in rows:
        combo = tuple(_value(row, f) for f in others)
        levels.setdefault(_value(row, target_factor), set()).add(combo)
    if len(levels) < 2:
        raise ValueError(f"factor {target_factor!r} needs at least two distinct values")
    common = set.intersection(*levels.values())
    return [row for row in rows if tuple(_value(row, f) for f in others) in common]


def midranks(values: Sequence[float]) -> np.ndarray:
    """Ranks starting at 1, ties receiving the average of the ranks they span."""
    x = np.asarray(values, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=np.float64)
    sorted_x = x[order]
    start = 0
    while start < len(x):
        stop = start
        while stop + 1 < len(x) and sorted_x[stop + 1] == sorted_x[start]:
            stop += 1
        ranks[order[start:stop + 1]] = (start + stop) / 2.0 + 1.0
        start = stop + 1
    return ranks


def _tie_term(values: np.ndarray) -> float:
    _, counts = np.unique(values, return_counts=True)
    return float((counts ** 3 - counts).sum())


def _gamma_series(a: float, x: float) -> float:
    term = total = 1.0 / a
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a: float, x: float) -> float:
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_upper_regularized(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a)."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


def chi2_survival(statistic: float, dof: int) -> float:
    return gamma_upper_regularized(dof / 2.0, statistic / 2.0)


@dataclass(frozen=True)
class TestResult:
    W: float
    ddof1: int
    Q: float
    p_unc: float
    p_corr: float = float("nan")
    n_subjects: int = 0

    def row(self) -> list[str]:
        return [f"{self.W:.6g}", str(self.ddof1), f"{self.Q:.6g}", f"{self.p_corr:.6g}"]


def friedman(matrix) -> TestResult:
    """Rows are subjects (blocks), columns are treatments."""
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("friedman expects a 2-d matrix")
    n, k = data.shape
    if n < 2 or k < 2:
        raise ValueError("friedman needs at least 2 subjects and 2 treatments")
    ranks = np.vstack([midranks(row) for row in data])
    mean_ranks = ranks.mean(axis=0)
    q = 12.0 * n / (k * (k + 1)) * float(((mean_ranks - (k + 1) / 2.0) ** 2).sum())
    divisor = 1.0 - sum(_tie_term(row) for row in data) / (n * k * (k * k - 1))
    if divisor <= 1e-12:
        q, p = 0.0, 1.0
    else:
        q /= divisor
        p = chi2_survival(q, k - 1)
    return TestResult(W=q / (n * (k - 1)), ddof1=k - 1, Q=q, p_unc=p, p_corr=p, n_subjects=n)


def _exact_upper_tail(n: int) -> np.ndarray:
    """Counts of sign assignments per achievable W+ for ranks 1..n."""
    top = n * (n + 1) // 2
    counts = np.zeros(top + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in range(1, n + 1):
        counts[r:] = counts[r:] + counts[:-r].copy()
    return counts


def wilcoxon_signed_rank(a, b, mode: str = "auto") -> float:
    """Two-sided p-value; zero differences are dropped."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) == 0:
        raise ValueError("wilcoxon needs two equal-length non-empty samples")
    d = x - y
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks = midranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    ties = _tie_term(np.abs(d)) > 0
    exact = mode == "exact" or (mode == "auto" and n <= 25 and not ties)
    if exact:
        if ties:
            raise ValueError("exact mode requires untied absolute differences")
        counts = _exact_upper_tail(n)
        w = int(round(w_plus))
        total = 2.0 ** n
        lower = counts[:w + 1].sum() / total
        upper = counts[w:].sum() / total
        return float(min(1.0, 2.0 * min(lower, upper)))
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - _tie_term(np.abs(d)) / 48.0
    if var <= 0:
        return 1.0
    z = (w_plus - mean) / math.sqrt(var)
    return float(min(1.0, math.erfc(abs(z) / math.sqrt(2.0))))


def holm(pvals: Sequence[float]) -> list[float]:
    p = np.asarray(pvals, dtype=np.float64)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = np.argsort(p, kind="mergesort")
    out = np.empty(m)
    running = 0.0
    for i, idx in enumerate(order):
        running = max(running, min(1.0, (m - i) * p[idx]))
        out[idx] = running
    return out.tolist()


@dataclass
class FactorTest:
    metric: str
    target: str
    factor: str
    levels: list
    result: TestResult
    matrix: np.ndarray | None = None
    posthoc: dict = field(default_factory=dict)  # (level_a, level_b) -> corrected p


def factor_matrix(records: Sequence[EvalRecord], factor: str, metric: str):
    """Subjects (evaluated_on) x factor levels, averaging over the remaining factors."""
    balance = "evaluated_on" if factor in ("to_technique", "to_percent") else factor
    try:
        kept = common_factor_combinations(records, balance, FACTOR_COLUMNS)
    except ValueError:
        return None, [], []
    cells: dict = {}
    for r in kept:
        cells.setdefault((r.evaluated_on, r.get(factor)), []).append(r.get(metric))
    subjects = sorted({s for s, _ in cells})
    levels = sorted({lv for _, lv in cells}, key=str)
    complete = [s for s in subjects if all((s, lv) in cells for lv in levels)]
    matrix = np.array([[np.mean(cells[(s, lv)]) for lv in levels] for s in complete])
    return matrix, complete, levels


def run_factor_suite(records: Sequence[EvalRecord], alpha: float = 0.05,
                     metrics: Sequence[str] = METRICS, targets: Sequence[str] = TARGETS,
                     factors: Sequence[str] = FACTORS) -> list[FactorTest]:
    tests: list[FactorTest] = []
    for metric in metrics:
        for target in targets:
            subset = [r for r in records if r.target == target]
            for factor in factors:
                matrix, subjects, levels = factor_matrix(subset, factor, metric)
                if matrix is None or len(levels) < 2 or len(subjects) < 2:
                    log.info("skipping %s/%s/%s: %d levels, %d subjects after balancing",
                             metric, target, factor, len(levels), len(subjects))
                    continue
                tests.append(FactorTest(metric, target, factor, levels, friedman(matrix), matrix))
    corrected = holm([t.result.p_unc for t in tests]) if tests else []
    for t, p in zip(tests, corrected):
        r = t.result
        t.result = TestResult(r.W, r.ddof1, r.Q, r.p_unc, p, r.n_subjects)
        if p < alpha:
            pairs = list(itertools.combinations(range(len(t.levels)), 2))
            raw = [wilcoxon_signed_rank(t.matrix[:, i], t.matrix[:, j]) for i, j in pairs]
            for (i, j), q in zip(pairs, holm(raw)):
                t.posthoc[(t.levels[i], t.levels[j])] = q
    return tests


def friedman_table(tests: Sequence[FactorTest]) -> str:
    lines = ["\t".join(("metric", "target", "factor") + FRIEDMAN_COLUMNS)]
    for t in tests:
        lines.append("\t".join([t.metric, t.target, t.factor, *t.result.row()]))
    return "\n".join(lines) + "\n"


def posthoc_table(tests: Sequence[FactorTest]) -> str:
    lines = ["\t".join(("metric", "target", "factor", "level_a", "level_b", "p-corr"))]
    for t in tests:
        for (a, b), p in t.posthoc.items():
            lines.append("\t".join([t.metric, t.target, t.factor, str(a), str(b), f"{p:.6g}"]))
    return "\n".join(lines) + "\n"
