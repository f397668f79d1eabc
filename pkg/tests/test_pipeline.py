from __future__ import annotations

import hashlib
from dataclasses import replace
from pathlib import Path

import pytest

from ctxengage import pipeline
from ctxengage.cli import build_config, main, make_parser
from ctxengage.ingest import DatasetId, read_table
from ctxengage.pipeline import (MissingInputError, PipelineConfig, eval_datasets, follow_scope,
                                parse_pipeline_config, planned_datasets, required_datasets,
                                run_all, run_stage, status_rows)
from ctxengage.synthgen import SynthConfig

SMALL_SYNTH = SynthConfig(seed=1, n_rows=20_000, n_viewers=1500, n_authors=800, n_tweets=12_000)


def small_config(root: Path, **overrides) -> PipelineConfig:
    base = PipelineConfig(root=root, IMPORT_DATASETS=("train", "val"),
                          SAMPLING_TECHNIQUES=("random",), SAMPLING_PERCENTAGES=(10,),
                          EVAL_PERCENTAGES=(10,), CLASSIFIER_NAMES=("bayes",), TOP_NS=("top_5",),
                          FEATURES_NOTES=("scaled",), TARGETS=("like",), synth=SMALL_SYNTH)
    return replace(base, **overrides)


def digests(root: Path) -> dict[str, str]:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


def states(config) -> dict[tuple[str, str], str]:
    return {(d, s): state for d, s, state in status_rows(config)}


def test_dataset_planning():
    config = PipelineConfig(IMPORT_DATASETS=("test",), SAMPLING_TECHNIQUES=("EU", "full"),
                            SAMPLING_PERCENTAGES=(1, 10))
    names = [d.name for d in planned_datasets(config)]
    assert names == ["test_EU_sample_1pct", "test_EU_sample_10pct", "test"]
    needed = {d.name for d in required_datasets(config)}
    assert {"train_EU_sample_1pct", "val_EU_sample_10pct", "train"} <= needed
    assert [d.name for d in follow_scope(DatasetId("val", "EU", 1))] == \
        ["train_EU_sample_1pct", "val_EU_sample_1pct"]
    assert {d.name for d in eval_datasets(config)} == {"test", "test_EU_sample_1pct"}
    dev = replace(config, DEV=True)
    assert [d.name for d in planned_datasets(dev)] == ["test_EU_sample_1pct"]


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(CLASSIFIER_NAMES=("gbt",)).validate()
    with pytest.raises(ValueError):
        PipelineConfig(FIT_DATASETS=("val_random_sample_1pct",)).validate()
    with pytest.raises(ValueError):
        parse_pipeline_config("NOT_A_SETTING = 1")
    config = parse_pipeline_config("DEV = yes\nTARGETS = like, quote  # comment\nsynth.n_rows = 50\n")
    assert config.DEV and config.TARGETS == ("like", "quote") and config.synth.n_rows == 50


def test_command_line_overrides_config_file(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("TARGETS = like\nseed = 4\nroot = from-file\n")
    monkeypatch.setenv("CTXENGAGE_ROOT", str(tmp_path / "env"))
    args = make_parser().parse_args(["status", "--config", str(cfg), "--targets", "reply,quote",
                                     "--dev"])
    config = build_config(args)
    assert config.TARGETS == ("reply", "quote") and config.seed == 4 and config.DEV
    assert config.root == Path("from-file")
    args = make_parser().parse_args(["status", "--root", str(tmp_path / "cli")])
    assert build_config(args).root == tmp_path / "cli"
    assert build_config(make_parser().parse_args(["status"])).root == tmp_path / "env"


def test_missing_input_is_reported(tmp_path, capsys):
    config = small_config(tmp_path)
    with pytest.raises(MissingInputError, match="run the stage"):
        run_stage("fe02", config)
    code = main(["stage", "fe00", "--root", str(tmp_path), "--import-datasets", "train",
                 "--sampling-techniques", "random", "--sampling-percentages", "10"])
    assert code == 2 and "missing input" in capsys.readouterr().err


def test_status_rerun_and_report(tmp_path, capsys):
    config = small_config(tmp_path)
    assert set(states(config).values()) == {"pending", "-"}
    run_stage("dataprep", config)
    run_stage("fe00", config)
    run_stage("fe01", config)
    state = states(config)
    assert state[("train_random_sample_10pct", "fe01")] == "complete"
    assert state[("train_random_sample_10pct", "fe02")] == "pending"
    assert state[("val_random_sample_10pct", "pred00")] == "-"
    train = read_table(DatasetId("train"), tmp_path / "data")
    sample = read_table(DatasetId("train", "random", 10), tmp_path / "data")
    assert sample.row_count == train.row_count * 10 // 100

    run_all(config)
    assert set(states(config).values()) == {"complete", "-"}
    mtimes = {p: p.stat().st_mtime_ns for p in tmp_path.rglob("*") if p.is_file()}
    run_all(config)
    assert {p: p.stat().st_mtime_ns for p in tmp_path.rglob("*") if p.is_file()} == mtimes

    assert main(["report", "--root", str(tmp_path), "--import-datasets", "train,val",
                 "--sampling-techniques", "random", "--sampling-percentages", "10",
                 "--targets", "like"]) == 0
    out = capsys.readouterr().out
    assert "target\talgorithm\tnote\tfs\ttrained\tevaluated\tmetric\tvalue" in out
    assert "# Friedman tests" in out


def test_interrupted_run_resumes_to_identical_outputs(tmp_path, monkeypatch):
    clean = small_config(tmp_path / "clean")
    run_all(clean)

    crashed = small_config(tmp_path / "crashed")
    real = pipeline.time_stage
    calls = []

    def flaky(*args, **kwargs):
        calls.append(1)
        if len(calls) == 2:
            raise RuntimeError("simulated crash")
        return real(*args, **kwargs)

    monkeypatch.setattr(pipeline, "time_stage", flaky)
    with pytest.raises(RuntimeError):
        run_all(crashed)
    state = states(crashed)
    assert state[("train_random_sample_10pct", "fe03")] == "complete"
    assert state[("val_random_sample_10pct", "fe03")] == "pending"
    monkeypatch.setattr(pipeline, "time_stage", real)
    run_all(crashed)
    assert digests(tmp_path / "crashed") == digests(tmp_path / "clean")


def test_forced_rebuild_is_byte_identical(tmp_path):
    config = small_config(tmp_path)
    run_all(config)
    before = digests(tmp_path)
    run_all(replace(config, CREATE_EVEN_IF_ALREADY_EXIST=True, REWRITE_EXISTING_MODELS=True))
    assert digests(tmp_path) == before


def test_dev_run_covers_every_target(tmp_path):
    config = small_config(tmp_path, DEV=True, SAMPLING_PERCENTAGES=(1, 10), EVAL_PERCENTAGES=(1,),
                          IMPORT_DATASETS=("train", "val+test"),
                          TARGETS=("like", "reply", "retweet", "quote", "react"),
                          synth=replace(SMALL_SYNTH, n_rows=40_000))
    run_all(config)
    rows = pipeline.all_evaluations(pipeline.Artifacts(tmp_path))
    assert {r.target for r in rows} == {"like", "reply", "retweet", "quote", "react"}
    assert {r.evaluated_on for r in rows} == {"train_random_sample_1pct",
                                             "val+test_random_sample_1pct"}
    assert not (tmp_path / "data" / "Final_train.data.tsv").exists()
