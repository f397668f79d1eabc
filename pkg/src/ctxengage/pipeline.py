"""Resumable stage orchestration from raw interactions to significance tests."""
from __future__ import annotations

import hashlib
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence


from .eval_metrics import EvalRow, read_evaluations, write_evaluations
from .feat_encode import encoding_stage, label_stage
from .feat_graph import graph_stage
from .feat_history import designate_history, engagement_stage, merge_final
from .feat_time import time_stage
from .ingest import (SOURCES, DatasetId, assign_row_ids, atomic_write_bytes, read_raw_tsv,
                     read_table, stage_exists, write_table)
from .learn import (GRIDS, KINDS, ModelSpec, cross_validate, evaluate_model, fit_predict_evaluate,
                    load_model, model_exists)
from .registry import GRAPH_FEATURES, GRAPH_RATIO_FEATURES, ORACLE_FEATURES, TARGETS, TIME_FEATURES
from .sampling import SAMPLE_PERCENTS, SAMPLE_TECHNIQUES, SamplePlan, apply_plan
from .select import (FEATURE_NOTES, FEATURE_SELECTIONS, FeatureFrame, categorise, selections_for,
                     vector_name, vectorise)
from .stats import (friedman_table, posthoc_table, records_from_rows, run_factor_suite)
from .synthgen import SynthConfig, generate, split_by_week, split_holdout
from .table import ColumnTable

log = logging.getLogger(__name__)

STAGES = ("dataprep", "fe00", "fe01", "fe02", "fe03", "fe04", "fe05", "fs00", "fs01",
          "pred00", "pred01", "stats")
OUTPUT_PREFIX = {"dataprep": "", "fe00": "FE_", "fe01": "Encoding_", "fe02": "GraphBased_",
                 "fe03": "Time_", "fe04": "Engagement_", "fe05": "Final_", "fs00": "Categorised_",
                 "fs01": "ChiSq_"}
INPUT_PREFIXES = {"fe00": ("",), "fe01": ("FE_",), "fe02": ("Encoding_",), "fe03": ("Encoding_",),
                  "fe04": ("Encoding_",),
                  "fe05": ("Encoding_", "GraphBased_", "Time_", "Engagement_"),
                  "fs00": ("Final_",), "fs01": ("Categorised_",), "pred00": ("ChiSq_",),
                  "pred01": ("ChiSq_",)}
EVAL_PERCENTS = (1, 2)


class MissingInputError(FileNotFoundError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    root: Path = Path("ctxengage-root")
    seed: int = 0
    CREATE_EVEN_IF_ALREADY_EXIST: bool = False
    DEV: bool = False
    REWRITE_EXISTING_MODELS: bool = False
    RECREATE_MISSING_MODELS: bool = True
    IMPORT_DATASETS: tuple[str, ...] = SOURCES
    SAMPLING_TECHNIQUES: tuple[str, ...] = SAMPLE_TECHNIQUES
    SAMPLING_PERCENTAGES: tuple[int, ...] = SAMPLE_PERCENTS
    CLASSIFIER_NAMES: tuple[str, ...] = KINDS
    TOP_NS: tuple[str, ...] = FEATURE_SELECTIONS
    FEATURES_NOTES: tuple[str, ...] = FEATURE_NOTES
    TARGETS: tuple[str, ...] = TARGETS
    FIT_DATASETS: tuple[str, ...] = ()
    EVAL_PERCENTAGES: tuple[int, ...] = EVAL_PERCENTS
    alpha: float = 0.05
    raw_train: str = ""
    raw_val: str = ""
    raw_test: str = ""
    synth: SynthConfig = field(default_factory=SynthConfig)

    def validate(self) -> None:
        vocab = {"IMPORT_DATASETS": SOURCES, "SAMPLING_TECHNIQUES": SAMPLE_TECHNIQUES + ("full",),
                 "SAMPLING_PERCENTAGES": SAMPLE_PERCENTS, "CLASSIFIER_NAMES": KINDS,
                 "TOP_NS": FEATURE_SELECTIONS, "FEATURES_NOTES": FEATURE_NOTES, "TARGETS": TARGETS,
                 "EVAL_PERCENTAGES": SAMPLE_PERCENTS}
        for name, allowed in vocab.items():
            bad = [v for v in getattr(self, name) if v not in allowed]
            if bad:
                raise ValueError(f"{name} contains values outside {list(allowed)}: {bad}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        for name in self.FIT_DATASETS:
            if DatasetId.parse(name).source != "train":
                raise ValueError(f"models are fitted on train datasets only, not {name}")
        self.synth.validate()


# --------------------------------------------------------------------------
# configuration files

_BOOL_WORDS = {"true": True, "yes": True, "1": True, "on": True,
               "false": False, "no": False, "0": False, "off": False}


def _convert(name: str, text: str):
    kind = {f.name: f.type for f in fields(PipelineConfig)}[name]
    if name in ("SAMPLING_PERCENTAGES", "EVAL_PERCENTAGES"):
        return tuple(int(v) for v in _split_list(text))
    if name in ("IMPORT_DATASETS", "SAMPLING_TECHNIQUES", "CLASSIFIER_NAMES", "TOP_NS",
                "FEATURES_NOTES", "TARGETS", "FIT_DATASETS"):
        return tuple(_split_list(text))
    if "bool" in str(kind):
        try:
            return _BOOL_WORDS[text.strip().lower()]
        except KeyError:
            raise ValueError(f"{name}: expected a boolean, got {text!r}") from None
    if name == "seed":
        return int(text)
    if name == "alpha":
        return float(text)
    if name == "root":
        return Path(text)
    return text


def _split_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def parse_pipeline_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """``KEY = value`` lines; ``synth.<field>`` keys configure the synthetic corpus."""
    config = base or PipelineConfig()
    known = {f.name for f in fields(PipelineConfig)} - {"synth"}
    updates: dict = {}
    synth_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected KEY = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("synth."):
            synth_lines.append(f"{key[6:]} = {value}")
        elif key in known:
            updates[key] = _convert(key, value)
        else:
            raise ValueError(f"line {lineno}: unknown setting {key!r}")
    if synth_lines:
        updates["synth"] = _merge_synth(config.synth, "\n".join(synth_lines))
    return replace(config, **updates)


def _merge_synth(base: SynthConfig, text: str) -> SynthConfig:
    from .synthgen import parse_config_text
    parsed = parse_config_text(text)
    defaults = SynthConfig()
    changed = {f.name: getattr(parsed, f.name) for f in fields(SynthConfig)
               if getattr(parsed, f.name) != getattr(defaults, f.name)}
    return replace(base, **changed)


# --------------------------------------------------------------------------
# dataset planning

def planned_datasets(config: PipelineConfig) -> list[DatasetId]:
    """Datasets requested by the configuration, in a stable order."""
    out = []
    for source in config.IMPORT_DATASETS:
        for technique in config.SAMPLING_TECHNIQUES:
            if technique == "full":
                if not config.DEV:
                    out.append(DatasetId(source))
                continue
            for percent in config.SAMPLING_PERCENTAGES:
                if config.DEV and percent != 1:
                    continue
                out.append(DatasetId(source, technique, percent))
    return sorted(set(out), key=_order_key)


def _order_key(d: DatasetId):
    return (SOURCES.index(d.source), d.technique, d.percent)


def train_counterpart(d: DatasetId) -> DatasetId:
    return DatasetId("train", d.technique, d.percent)


def follow_scope(d: DatasetId) -> list[DatasetId]:
    """Datasets whose rows supply follow relations for ``d``."""
    if d.source == "train":
        return [d]
    if d.source == "test":
        return [train_counterpart(d), d.with_source("val"), d]
    return [train_counterpart(d), d]


def required_datasets(config: PipelineConfig) -> list[DatasetId]:
    """Planned datasets plus every counterpart their features depend on."""
    needed = set(planned_datasets(config))
    for d in list(needed):
        needed.update(follow_scope(d))
        needed.add(train_counterpart(d))
    return sorted(needed, key=_order_key)


def fit_datasets(config: PipelineConfig) -> list[DatasetId]:
    if config.FIT_DATASETS:
        return [DatasetId.parse(n) for n in config.FIT_DATASETS]
    return [d for d in planned_datasets(config) if d.source == "train"]


def eval_datasets(config: PipelineConfig) -> list[DatasetId]:
    return [d for d in planned_datasets(config)
            if d.percent in config.EVAL_PERCENTAGES or d.technique == "full"]


# --------------------------------------------------------------------------
# artifact layout

class Artifacts:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.data = self.root / "data"
        self.models = self.root / "models"
        self.evaluations = self.root / "evaluations"
        self.stats = self.root / "stats"
        self.manifests = self.root / "manifests"
        self._cache: dict[str, ColumnTable] = {}

    def table(self, d: DatasetId, stage: str | None = None) -> ColumnTable:
        if not stage_exists(d, self.data):
            raise MissingInputError(
                f"missing input {d.name}" + (f" needed by {stage}" if stage else "")
                + "; run the stage that produces it first")
        if d.name not in self._cache:
            self._cache[d.name] = read_table(d, self.data)
        return self._cache[d.name]

    def put(self, table: ColumnTable, d: DatasetId) -> list[Path]:
        self._cache[d.name] = table
        return list(write_table(table, d, self.data, overwrite=True))

    def forget(self) -> None:
        self._cache.clear()

    def manifest_path(self, stage: str, key: str) -> Path:
        return self.manifests / stage / f"{key}.json"

    def done(self, stage: str, key: str) -> bool:
        path = self.manifest_path(stage, key)
        if not path.is_file():
            return False
        try:
            outputs = json.loads(path.read_text())["outputs"]
        except (ValueError, KeyError):
            return False
        return all((self.root / rel).is_file() for rel in outputs)

    def record(self, stage: str, key: str, outputs: Iterable[Path]) -> None:
        digests = {}
        for path in sorted(set(Path(p) for p in outputs)):
            digests[str(path.relative_to(self.root))] = hashlib.sha256(path.read_bytes()).hexdigest()
        payload = json.dumps({"stage": stage, "task": key, "outputs": digests}, indent=1,
                             sort_keys=True) + "\n"
        atomic_write_bytes(self.manifest_path(stage, key), payload.encode())

    def selection_path(self, d: DatasetId) -> Path:
        return self.data / f"{d.with_prefix('ChiSq_').name}.selection.json"

    def scores_path(self, d: DatasetId) -> Path:
        return self.data / f"{d.with_prefix('ChiSq_').name}.scores.tsv"

    def evaluation_path(self, stage: str, d: DatasetId) -> Path:
        return self.evaluations / stage / f"{d.name}.tsv"


# --------------------------------------------------------------------------
# stage implementations

def _load_sources(config: PipelineConfig) -> dict[str, ColumnTable]:
    if config.raw_train or config.raw_val or config.raw_test:
        paths = {"train": config.raw_train, "val": config.raw_val, "test": config.raw_test}
        missing = [k for k, v in paths.items() if not v]
        if missing:
            raise MissingInputError(f"raw input paths not configured for {missing}")
        tables, start = {}, 0
        for source in ("train", "val", "test"):
            tables[source] = assign_row_ids(read_raw_tsv(paths[source]), start)
            start += tables[source].row_count
    else:
        corpus = assign_row_ids(generate(config.synth))
        train, holdout = split_by_week(corpus)
        val, test = split_holdout(holdout, config.synth.seed)
        tables = {"train": train, "val": val, "test": test}
    tables["val+test"] = ColumnTable.concat([tables["val"], tables["test"]])
    return tables


def sample_dataset(art: Artifacts, d: DatasetId, seed: int) -> list[Path]:
    """Write the raw sample ``d`` drawn from its full source table."""
    if d.technique == "full":
        art.table(d, "sample")
        return []
    full = art.table(DatasetId(d.source), "sample")
    return art.put(apply_plan(full, SamplePlan(d.technique, d.percent, seed)), d)


def stage_dataprep(config: PipelineConfig, art: Artifacts, datasets: Sequence[DatasetId]) -> None:
    sources_needed = sorted({d.source for d in datasets}, key=SOURCES.index)
    if not all(art.done("dataprep", DatasetId(s).name) for s in sources_needed) \
            or config.CREATE_EVEN_IF_ALREADY_EXIST:
        tables = _load_sources(config)
        for source in SOURCES:
            d = DatasetId(source)
            if art.done("dataprep", d.name) and not config.CREATE_EVEN_IF_ALREADY_EXIST:
                continue
            art.record("dataprep", d.name, art.put(tables[source], d))
    for d in datasets:
        if d.technique == "full" or (art.done("dataprep", d.name)
                                     and not config.CREATE_EVEN_IF_ALREADY_EXIST):
            continue
        art.record("dataprep", d.name, sample_dataset(art, d, config.seed))


def _per_dataset(stage: str, fn: Callable[[DatasetId], ColumnTable]):
    def run(config: PipelineConfig, art: Artifacts, datasets: Sequence[DatasetId]) -> None:
        for d in datasets:
            if art.done(stage, d.name) and not config.CREATE_EVEN_IF_ALREADY_EXIST:
                continue
            log.info("%s: %s", stage, d.name)
            table = fn(config, art, d)
            art.record(stage, d.name, art.put(table, d.with_prefix(OUTPUT_PREFIX[stage])))
    return run


def _fe00(config, art, d):
    return label_stage(art.table(d, "fe00"))


def _fe01(config, art, d):
    warnings: Counter = Counter()
    out = encoding_stage(art.table(d.with_prefix("FE_"), "fe01"), warnings)
    if warnings:
        log.warning("fe01 %s: %s", d.name, dict(warnings))
    return out


def _encoding(art, d, stage):
    return art.table(d.with_prefix("Encoding_"), stage)


def _fe02(config, art, d):
    target = _encoding(art, d, "fe02")
    train = _encoding(art, train_counterpart(d), "fe02")
    history = designate_history(train, target, d.source).history
    scope = [_encoding(art, s, "fe02") for s in follow_scope(d)]
    out = graph_stage(target, scope, history)
    return out.select(["row_id"] + GRAPH_FEATURES + GRAPH_RATIO_FEATURES)


def _fe03(config, art, d):
    target = _encoding(art, d, "fe03")
    history = None if d.source == "train" else _encoding(art, train_counterpart(d), "fe03")
    return time_stage(target, history).select(["row_id"] + TIME_FEATURES + ORACLE_FEATURES)


def _fe04(config, art, d):
    target = _encoding(art, d, "fe04")
    train = _encoding(art, train_counterpart(d), "fe04")
    return engagement_stage(train, target, d.source)


def _fe05(config, art, d):
    parts = [art.table(d.with_prefix(p), "fe05") for p in INPUT_PREFIXES["fe05"]]
    return merge_final(parts[0], parts[1:])


def _fs00(config, art, d):
    return categorise(art.table(d.with_prefix("Final_"), "fs00"))[0]


def stage_fs01(config: PipelineConfig, art: Artifacts, datasets: Sequence[DatasetId]) -> None:
    for d in datasets:
        if art.done("fs01", d.name) and not config.CREATE_EVEN_IF_ALREADY_EXIST:
            continue
        log.info("fs01: %s", d.name)
        table = art.table(d.with_prefix("Categorised_"), "fs01")
        train = art.table(train_counterpart(d).with_prefix("Categorised_"), "fs01")
        selections, scores = selections_for(train)
        vectorise(FeatureFrame.from_table(table), selections)
        outputs = art.put(table, d.with_prefix("ChiSq_"))
        sel_path = art.selection_path(d)
        atomic_write_bytes(sel_path, (json.dumps(selections, indent=1, sort_keys=True) + "\n").encode())
        lines = ["note\ttarget\tfeature\tchi_square"]
        for (note, target), by_feature in scores.items():
            lines += [f"{note}\t{target}\t{name}\t{value!r}" for name, value in by_feature.items()]
        score_path = art.scores_path(d)
        atomic_write_bytes(score_path, ("\n".join(lines) + "\n").encode())
        art.record("fs01", d.name, outputs + [sel_path, score_path])


def load_frame(art: Artifacts, d: DatasetId) -> FeatureFrame:
    table = art.table(d.with_prefix("ChiSq_"), "pred")
    path = art.selection_path(d)
    if not path.is_file():
        raise MissingInputError(f"missing selection file for {d.name}; run fs01 first")
    return vectorise(FeatureFrame.from_table(table), json.loads(path.read_text()))


def model_specs(config: PipelineConfig, fit_on: DatasetId) -> list[ModelSpec]:
    based_on = train_counterpart(fit_on)
    return [ModelSpec(kind, fs, note, target, vector_name(fs, note, target), fit_on.sample_name,
                      based_on.sample_name, config.seed)
            for kind in config.CLASSIFIER_NAMES for fs in config.TOP_NS
            for note in config.FEATURES_NOTES for target in config.TARGETS]


def _tuned_params(spec: ModelSpec, tune_frame: FeatureFrame) -> dict:
    X = tune_frame.vector(spec.vector_name)
    y = tune_frame.labels[spec.target]
    result = cross_validate(X, y, spec.kind, GRIDS[spec.kind], folds=4, seed=spec.seed)
    log.info("tuned %s: %s", spec.name, result.best_params)
    return result.best_params


def _model_dir(art: Artifacts, kind: str) -> Path:
    return art.models / kind


def _fit_or_load(config, art, spec, frame, tune_frame, eval_frames):
    directory = _model_dir(art, spec.kind)
    if model_exists(spec.name, directory) and not config.REWRITE_EXISTING_MODELS:
        model = load_model(spec.name, directory)
        rows = []
        for name, f in eval_frames.items():
            rows.extend(evaluate_model(model, spec, f, name))
        return rows
    params = _tuned_params(spec, tune_frame)
    _, rows = fit_predict_evaluate(spec, frame, params, eval_frames, directory,
                                   rewrite_existing=True,
                                   extra_meta={"based_on": spec.based_on, "tuned_on": spec.based_on})
    return rows


def stage_pred00(config: PipelineConfig, art: Artifacts, datasets: Sequence[DatasetId]) -> None:
    for d in fit_datasets(config):
        if art.done("pred00", d.name) and not config.CREATE_EVEN_IF_ALREADY_EXIST:
            continue
        log.info("pred00: %s", d.name)
        frame = load_frame(art, d)
        tune_frame = load_frame(art, train_counterpart(d))
        rows: list[EvalRow] = []
        outputs = []
        for spec in model_specs(config, d):
            rows.extend(_fit_or_load(config, art, spec, frame, tune_frame, {d.sample_name: frame}))
            outputs.append(_model_dir(art, spec.kind) / f"{spec.name}.model.json")
        path = art.evaluation_path("pred00", d)
        write_evaluations(rows, path)
        art.record("pred00", d.name, outputs + [path])


def stage_pred01(config: PipelineConfig, art: Artifacts, datasets: Sequence[DatasetId]) -> None:
    frames: dict[str, FeatureFrame] = {}
    for d in fit_datasets(config):
        if art.done("pred01", d.name) and not config.CREATE_EVEN_IF_ALREADY_EXIST:
            continue
        log.info("pred01: %s", d.name)
        targets = [e for e in eval_datasets(config) if e != d]
        for e in targets:
            if e.name not in frames:
                frames[e.name] = load_frame(art, e)
        eval_frames = {e.sample_name: frames[e.name] for e in targets}
        rows: list[EvalRow] = []
        outputs = []
        for spec in model_specs(config, d):
            directory = _model_dir(art, spec.kind)
            if not model_exists(spec.name, directory):
                if not config.RECREATE_MISSING_MODELS:
                    log.warning("model %s is missing and will not be recreated", spec.name)
                    continue
                frame = load_frame(art, d)
                _fit_or_load(config, art, spec, frame, load_frame(art, train_counterpart(d)), {})
            model = load_model(spec.name, directory)
            for name, f in eval_frames.items():
                rows.extend(evaluate_model(model, spec, f, name))
            outputs.append(directory / f"{spec.name}.model.json")
        path = art.evaluation_path("pred01", d)
        write_evaluations(rows, path)
        art.record("pred01", d.name, outputs + [path])


def all_evaluations(art: Artifacts) -> list[EvalRow]:
    rows = []
    for stage in ("pred00", "pred01"):
        directory = art.evaluations / stage
        if directory.is_dir():
            for path in sorted(directory.glob("*.tsv")):
                rows.extend(read_evaluations(path))
    return rows


BEST_COLUMNS = ("target", "algorithm", "note", "fs", "trained", "evaluated", "metric", "value")


def best_results(rows: Sequence[EvalRow], targets: Sequence[str] = TARGETS) -> list[tuple]:
    """Per metric and target, the record with the highest value."""
    out = []
    for metric in ("PRAUC", "RCE"):
        for target in targets:
            candidates = [r for r in rows if r.metric == metric and r.target == target]
            if not candidates:
                continue
            best = max(candidates, key=lambda r: r.value)
            out.append((target, best.algorithm, best.note, best.feature_selection, best.trained_on,
                        best.evaluated_on, metric, best.value))
    return out


def format_best(best: Sequence[tuple]) -> str:
    lines = ["\t".join(BEST_COLUMNS)]
    lines += ["\t".join(str(v) if not isinstance(v, float) else f"{v:.6g}" for v in row)
              for row in best]
    return "\n".join(lines) + "\n"


def stage_stats(config: PipelineConfig, art: Artifacts, datasets: Sequence[DatasetId]) -> None:
    if art.done("stats", "all") and not config.CREATE_EVEN_IF_ALREADY_EXIST:
        return
    rows = all_evaluations(art)
    if not rows:
        raise MissingInputError("no evaluation files found; run pred00 and pred01 first")
    records = [r for r in records_from_rows(rows) if DatasetId.parse(r.trained_on).source == "train"]
    tests = run_factor_suite(records, alpha=config.alpha, targets=config.TARGETS)
    outputs = []
    for name, text in (("friedman.tsv", friedman_table(tests)), ("posthoc.tsv", posthoc_table(tests)),
                       ("best.tsv", format_best(best_results(rows, config.TARGETS)))):
        path = art.stats / name
        atomic_write_bytes(path, text.encode())
        outputs.append(path)
    art.record("stats", "all", outputs)


STAGE_FUNCTIONS = {
    "dataprep": stage_dataprep,
    "fe00": _per_dataset("fe00", _fe00),
    "fe01": _per_dataset("fe01", _fe01),
    "fe02": _per_dataset("fe02", _fe02),
    "fe03": _per_dataset("fe03", _fe03),
    "fe04": _per_dataset("fe04", _fe04),
    "fe05": _per_dataset("fe05", _fe05),
    "fs00": _per_dataset("fs00", _fs00),
    "fs01": stage_fs01,
    "pred00": stage_pred00,
    "pred01": stage_pred01,
    "stats": stage_stats,
}


def run_stage(stage: str, config: PipelineConfig, art: Artifacts | None = None) -> None:
    if stage not in STAGE_FUNCTIONS:
        raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")
    config.validate()
    art = art or Artifacts(config.root)
    STAGE_FUNCTIONS[stage](config, art, required_datasets(config))


def run_all(config: PipelineConfig) -> Artifacts:
    config.validate()
    art = Artifacts(config.root)
    for stage in STAGES:
        log.info("stage %s", stage)
        run_stage(stage, config, art)
    return art


# --------------------------------------------------------------------------
# inspection

def _task_keys(stage: str, config: PipelineConfig, d: DatasetId) -> str | None:
    if stage in ("pred00", "pred01"):
        return d.name if d in fit_datasets(config) else None
    if stage == "stats":
        return "all"
    return d.name


def status_rows(config: PipelineConfig) -> list[tuple[str, str, str]]:
    art = Artifacts(config.root)
    rows = []
    for d in required_datasets(config):
        for stage in STAGES:
            key = _task_keys(stage, config, d)
            state = "-" if key is None else ("complete" if art.done(stage, key) else "pending")
            rows.append((d.name, stage, state))
    return rows


def status(config: PipelineConfig) -> str:
    rows = status_rows(config)
    lines = ["dataset\tstage\tstate"] + ["\t".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def report(config: PipelineConfig) -> str:
    art = Artifacts(config.root)
    rows = all_evaluations(art)
    if not rows:
        raise MissingInputError("no evaluations to report; run pred00/pred01 first")
    records = [r for r in records_from_rows(rows) if DatasetId.parse(r.trained_on).source == "train"]
    tests = run_factor_suite(records, alpha=config.alpha, targets=config.TARGETS)
    return ("# best results\n" + format_best(best_results(rows, config.TARGETS))
            + "\n# Friedman tests\n" + friedman_table(tests)
            + "\n# posthoc Wilcoxon (Holm-corrected)\n" + posthoc_table(tests))
