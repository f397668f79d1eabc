"""Command-line entry point: ``ctxengage <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import pipeline
from .ingest import DatasetId, write_raw_tsv
from .synthgen import generate, parse_config_text, split_by_week, split_holdout

LIST_OPTIONS = ("import-datasets", "sampling-techniques", "sampling-percentages", "classifier-names",
                "top-ns", "features-notes", "targets", "fit-datasets", "eval-percentages")
FLAG_OPTIONS = ("create-even-if-already-exist", "dev", "rewrite-existing-models",
                "recreate-missing-models")


def _config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="file of KEY = value settings")
    parser.add_argument("--root", type=Path, help="artifact directory (default $CTXENGAGE_ROOT)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--alpha", type=float)
    for name in LIST_OPTIONS:
        parser.add_argument(f"--{name}", metavar="A,B,...", help="comma-separated list")
    for name in FLAG_OPTIONS:
        parser.add_argument(f"--{name}", action=argparse.BooleanOptionalAction, default=None)
    for source in ("train", "val", "test"):
        parser.add_argument(f"--raw-{source}", metavar="TSV", help=f"raw {source} interactions")


def build_config(args: argparse.Namespace) -> pipeline.PipelineConfig:
    """Defaults, then the config file, then explicit command-line values."""
    config = pipeline.PipelineConfig()
    env_root = os.environ.get("CTXENGAGE_ROOT")
    if env_root:
        config = replace(config, root=Path(env_root))
    if args.config is not None:
        config = pipeline.parse_pipeline_config(args.config.read_text(), config)
    lines = []
    for name in LIST_OPTIONS + FLAG_OPTIONS:
        value = getattr(args, name.replace("-", "_"))
        if value is not None:
            key = name.replace("-", "_").upper()
            lines.append(f"{key} = {str(value).lower() if isinstance(value, bool) else value}")
    for name in ("seed", "alpha"):
        if getattr(args, name) is not None:
            lines.append(f"{name} = {getattr(args, name)}")
    for source in ("train", "val", "test"):
        value = getattr(args, f"raw_{source}")
        if value:
            lines.append(f"raw_{source} = {value}")
    if lines:
        config = pipeline.parse_pipeline_config("\n".join(lines), config)
    if args.root is not None:
        config = replace(config, root=args.root)
    config.validate()
    return config


def cmd_synthgen(args) -> int:
    synth = parse_config_text(args.synth_config.read_text()) if args.synth_config else None
    if synth is None:
        synth = pipeline.PipelineConfig().synth
    if args.seed is not None:
        synth = replace(synth, seed=args.seed)
    if args.rows is not None:
        synth = replace(synth, n_rows=args.rows)
    synth.validate()
    train, holdout = split_by_week(generate(synth))
    val, test = split_holdout(holdout, synth.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, table in (("train", train), ("val", val), ("test", test)):
        write_raw_tsv(table, args.out / f"{name}.tsv")
        print(f"{name}\t{table.row_count}\t{args.out / f'{name}.tsv'}")
    return 0


def cmd_sample(args) -> int:
    config = build_config(args)
    art = pipeline.Artifacts(config.root)
    d = DatasetId(args.source, args.technique, args.percent)
    paths = pipeline.sample_dataset(art, d, config.seed)
    art.record("dataprep", d.name, paths)
    print(d.name)
    return 0


def cmd_stage(args) -> int:
    pipeline.run_stage(args.name, build_config(args))
    return 0


def cmd_run_all(args) -> int:
    pipeline.run_all(build_config(args))
    return 0


def cmd_status(args) -> int:
    sys.stdout.write(pipeline.status(build_config(args)))
    return 0


def cmd_report(args) -> int:
    sys.stdout.write(pipeline.report(build_config(args)))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxengage",
                                     description="engagement prediction experiment pipeline")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthgen", help="write a synthetic train/val/test corpus as raw TSV")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--synth-config", type=Path, help="generator settings (key = value lines)")
    p.add_argument("--seed", type=int)
    p.add_argument("--rows", type=int)
    p.set_defaults(func=cmd_synthgen)

    p = sub.add_parser("sample", help="draw one sample from an imported source")
    _config_options(p)
    p.add_argument("--source", required=True, choices=("train", "val", "test", "val+test"))
    p.add_argument("--technique", required=True,
                   choices=("random", "EU", "EWU", "inter_EWU+EU", "tweet"))
    p.add_argument("--percent", required=True, type=int, choices=(1, 2, 5, 10))
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("stage", help="run one stage over every planned dataset")
    p.add_argument("name", choices=pipeline.STAGES)
    _config_options(p)
    p.set_defaults(func=cmd_stage)

    for name, func, text in (("run-all", cmd_run_all, "run every stage in order"),
                             ("status", cmd_status, "show which stage outputs exist"),
                             ("report", cmd_report, "best results and significance tests")):
        p = sub.add_parser(name, help=text)
        _config_options(p)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, FileExistsError) as exc:
        print(f"ctxengage: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
