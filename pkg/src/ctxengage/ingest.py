"""Parsing of the challenge TSV schema and deterministic persistence of tables.

A persisted table ``<name>`` consists of ``<name>.data.tsv`` (one line per row,
tab-separated, no header) and ``<name>.schema.tsv`` (row count plus one
``name<TAB>type`` line per column).  The schema file is written last, so its
presence marks a complete artifact.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .table import MISSING, ColumnTable, ColumnType

SOURCES = ("train", "val", "test", "val+test")
TECHNIQUES = ("full", "random", "EU", "EWU", "inter_EWU+EU", "tweet")
PERCENTS = (1, 2, 5, 10, 100)
STAGE_PREFIXES = ("", "FE_", "Encoding_", "GraphBased_", "Time_", "Engagement_", "Final_",
                  "Categorised_", "ChiSq_")

MEDIA_TYPES = ("Photo", "Video", "GIF")
TWEET_TYPES = ("Retweet", "Quote", "Reply", "TopLevel")
ENGAGEMENT_TYPES = ("reply", "retweet", "quote", "like")

RAW_SCHEMA: tuple[tuple[str, ColumnType], ...] = (
    ("text_tokens", ColumnType.STR),
    ("hashtags", ColumnType.SET),
    ("tweet_id", ColumnType.STR),
    ("present_media", ColumnType.LIST),
    ("present_links", ColumnType.SET),
    ("present_domains", ColumnType.SET),
    ("tweet_type", ColumnType.STR),
    ("language", ColumnType.STR),
    ("tweet_timestamp", ColumnType.INT),
    ("engaged_with_user_id", ColumnType.STR),
    ("engaged_with_user_follower_count", ColumnType.INT),
    ("engaged_with_user_following_count", ColumnType.INT),
    ("engaged_with_user_is_verified", ColumnType.BOOL),
    ("engaged_with_user_account_creation", ColumnType.INT),
    ("engaging_user_id", ColumnType.STR),
    ("engaging_user_follower_count", ColumnType.INT),
    ("engaging_user_following_count", ColumnType.INT),
    ("engaging_user_is_verified", ColumnType.BOOL),
    ("engaging_user_account_creation", ColumnType.INT),
    ("engagee_follows_engager", ColumnType.BOOL),
    ("reply_timestamp", ColumnType.OPT_INT),
    ("retweet_timestamp", ColumnType.OPT_INT),
    ("quote_timestamp", ColumnType.OPT_INT),
    ("like_timestamp", ColumnType.OPT_INT),
)
RAW_COLUMNS = tuple(name for name, _ in RAW_SCHEMA)
RAW_TYPES = dict(RAW_SCHEMA)

_ENUMS = {"present_media": frozenset(MEDIA_TYPES), "tweet_type": frozenset(TWEET_TYPES)}
_BOOLS = {"true": True, "false": False, "True": True, "False": False}


class TsvParseError(ValueError):
    def __init__(self, line: int, field: int, message: str):
        super().__init__(f"line {line}, field {field}: {message}")
        self.line = line
        self.field = field


class SchemaMismatchError(ValueError):
    pass


class TableCollisionError(FileExistsError):
    pass


@dataclass(frozen=True)
class InteractionRecord:
    """One viewer/tweet instance with every raw field of the challenge schema."""

    text_tokens: str
    hashtags: tuple[str, ...]
    tweet_id: str
    present_media: tuple[str, ...]
    present_links: tuple[str, ...]
    present_domains: tuple[str, ...]
    tweet_type: str
    language: str
    tweet_timestamp: int
    engaged_with_user_id: str
    engaged_with_user_follower_count: int
    engaged_with_user_following_count: int
    engaged_with_user_is_verified: bool
    engaged_with_user_account_creation: int
    engaging_user_id: str
    engaging_user_follower_count: int
    engaging_user_following_count: int
    engaging_user_is_verified: bool
    engaging_user_account_creation: int
    engagee_follows_engager: bool
    reply_timestamp: int | None = None
    retweet_timestamp: int | None = None
    quote_timestamp: int | None = None
    like_timestamp: int | None = None


def records_to_table(records: Iterable[InteractionRecord]) -> ColumnTable:
    records = list(records)
    cols = {}
    for name, kind in RAW_SCHEMA:
        values = [getattr(r, name) for r in records]
        if kind is ColumnType.OPT_INT:
            values = [MISSING if v is None else v for v in values]
        cols[name] = values
    return ColumnTable(cols, RAW_TYPES, row_count=len(records))


def table_to_records(table: ColumnTable) -> list[InteractionRecord]:
    names = [f.name for f in fields(InteractionRecord)]
    out = []
    for i in range(table.row_count):
        kwargs = {}
        for name in names:
            value = table[name][i]
            kind = table.type_of(name)
            if kind is ColumnType.OPT_INT:
                value = None if value == MISSING else int(value)
            elif kind is ColumnType.INT:
                value = int(value)
            elif kind is ColumnType.BOOL:
                value = bool(value)
            kwargs[name] = value
        out.append(InteractionRecord(**kwargs))
    return out


# --------------------------------------------------------------------------
# dataset naming

@dataclass(frozen=True, order=True)
class DatasetId:
    source: str
    technique: str = "full"
    percent: int = 100
    prefix: str = ""

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown sampling technique {self.technique!r}")
        if self.percent not in PERCENTS:
            raise ValueError(f"unsupported percent {self.percent!r}")
        if (self.technique == "full") != (self.percent == 100):
            raise ValueError("technique 'full' goes with percent 100 and only with it")

    @property
    def sample_name(self) -> str:
        if self.technique == "full":
            return self.source
        return f"{self.source}_{self.technique}_sample_{self.percent}pct"

    @property
    def name(self) -> str:
        return f"{self.prefix}{self.sample_name}"

    def with_prefix(self, prefix: str) -> "DatasetId":
        return DatasetId(self.source, self.technique, self.percent, prefix)

    def with_source(self, source: str) -> "DatasetId":
        return DatasetId(source, self.technique, self.percent, self.prefix)

    @classmethod
    def parse(cls, name: str, prefix: str = "") -> "DatasetId":
        body = name[len(prefix):] if prefix and name.startswith(prefix) else name
        if body in SOURCES:
            return cls(body, prefix=prefix)
        for source in sorted(SOURCES, key=len, reverse=True):
            if body.startswith(source + "_"):
                rest = body[len(source) + 1:]
                technique, _, size = rest.rpartition("_sample_")
                if size.endswith("pct"):
                    return cls(source, technique, int(size[:-3]), prefix)
        raise ValueError(f"cannot parse dataset name {name!r}")

    def __str__(self) -> str:
        return self.name


# --------------------------------------------------------------------------
# challenge TSV

def _parse_bool(token: str, line: int, field: int) -> bool:
    try:
        return _BOOLS[token]
    except KeyError:
        raise TsvParseError(line, field, f"expected true/false, got {token!r}") from None


def _parse_int(token: str, line: int, field: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise TsvParseError(line, field, f"expected an integer, got {token!r}") from None
    if value < 0:
        raise TsvParseError(line, field, f"negative value {value}")
    return value


def parse_tsv(stream: BinaryIO | bytes, sub_separator: str = " ") -> ColumnTable:
    """Parse challenge-format rows (24 tab-separated fields each)."""
    data = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
    text = data.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    columns: list[list] = [[] for _ in RAW_SCHEMA]
    for lineno, line in enumerate(lines, start=1):
        if line.endswith("\r"):
            line = line[:-1]
        parts = line.split("\t")
        if len(parts) != len(RAW_SCHEMA):
            raise TsvParseError(lineno, min(len(parts), len(RAW_SCHEMA)),
                                f"expected {len(RAW_SCHEMA)} fields, found {len(parts)}")
        for idx, ((name, kind), token) in enumerate(zip(RAW_SCHEMA, parts)):
            if kind is ColumnType.STR:
                if name in _ENUMS and token not in _ENUMS[name]:
                    raise TsvParseError(lineno, idx, f"unknown {name} token {token!r}")
                value = token
            elif kind in (ColumnType.SET, ColumnType.LIST):
                items = [t for t in token.split(sub_separator) if t] if token else []
                if name in _ENUMS:
                    for item in items:
                        if item not in _ENUMS[name]:
                            raise TsvParseError(lineno, idx, f"unknown {name} token {item!r}")
                value = items
            elif kind is ColumnType.INT:
                value = _parse_int(token, lineno, idx)
            elif kind is ColumnType.OPT_INT:
                value = MISSING if token == "" else _parse_int(token, lineno, idx)
            else:
                value = _parse_bool(token, lineno, idx)
            columns[idx].append(value)
    return ColumnTable({name: col for (name, _), col in zip(RAW_SCHEMA, columns)}, RAW_TYPES,
                       row_count=len(lines))


def serialize_tsv(table: ColumnTable, sub_separator: str = " ") -> bytes:
    """Render the raw columns of ``table`` in challenge format."""
    missing = [name for name in RAW_COLUMNS if name not in table]
    if missing:
        raise SchemaMismatchError(f"table lacks raw columns: {missing}")
    cells = [_format_column(table[name], RAW_TYPES[name], sub_separator) for name in RAW_COLUMNS]
    lines = ["\t".join(row) for row in zip(*cells)]
    return "".join(line + "\n" for line in lines).encode("utf-8")


def _format_column(arr: np.ndarray, kind: ColumnType, sep: str = " ") -> list[str]:
    if kind is ColumnType.INT:
        return arr.astype(str).tolist()
    if kind is ColumnType.OPT_INT:
        text = arr.astype(str)
        text[arr == MISSING] = ""
        return text.tolist()
    if kind is ColumnType.FLOAT:
        return arr.astype(str).tolist()
    if kind is ColumnType.BOOL:
        return np.where(arr, "true", "false").tolist()
    if kind is ColumnType.STR:
        out = arr.tolist()
        for value in out:
            if "\t" in value or "\n" in value:
                raise ValueError(f"string value {value!r} contains a tab or newline")
        return out
    out = []
    for tokens in arr:
        for token in tokens:
            if sep in token or "\t" in token or "\n" in token or not token:
                raise ValueError(f"token {token!r} cannot be serialized")
        out.append(sep.join(tokens))
    return out


def _parse_column(tokens: list[str], kind: ColumnType, name: str) -> np.ndarray:
    try:
        if kind is ColumnType.INT:
            return np.array(tokens, dtype=str).astype(np.int64) if tokens else np.zeros(0, np.int64)
        if kind is ColumnType.OPT_INT:
            return np.array([MISSING if t == "" else int(t) for t in tokens], dtype=np.int64)
        if kind is ColumnType.FLOAT:
            return np.array(tokens, dtype=str).astype(np.float64) if tokens else np.zeros(0)
        if kind is ColumnType.BOOL:
            return np.array([_BOOLS[t] for t in tokens], dtype=bool)
    except (ValueError, KeyError) as exc:
        raise SchemaMismatchError(f"column {name!r} does not parse as {kind.value}: {exc}") from None
    if kind is ColumnType.STR:
        out = np.empty(len(tokens), dtype=object)
        out[:] = tokens
        return out
    out = np.empty(len(tokens), dtype=object)
    out[:] = [tuple(t.split(" ")) if t else () for t in tokens]
    return out


# --------------------------------------------------------------------------
# persistence

_MAGIC = "#ctxengage-table\t1"


def _paths(id: DatasetId | str, root: str | os.PathLike) -> tuple[Path, Path]:
    name = id.name if isinstance(id, DatasetId) else str(id)
    base = Path(root)
    return base / f"{name}.schema.tsv", base / f"{name}.data.tsv"


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def table_bytes(table: ColumnTable) -> tuple[bytes, bytes]:
    """Return the (schema, data) byte payloads for ``table``."""
    schema = [_MAGIC, f"#rows\t{table.row_count}"]
    schema += [f"{name}\t{table.type_of(name).value}" for name in table.names]
    cells = [_format_column(table[n], table.type_of(n)) for n in table.names]
    if cells:
        lines = ["\t".join(row) for row in zip(*cells)]
    else:
        lines = [""] * table.row_count
    data = "".join(line + "\n" for line in lines).encode("utf-8")
    return ("\n".join(schema) + "\n").encode("utf-8"), data


def write_table(table: ColumnTable, id: DatasetId | str, root: str | os.PathLike,
                overwrite: bool = False) -> tuple[Path, Path]:
    schema_path, data_path = _paths(id, root)
    if schema_path.exists() and not overwrite:
        raise TableCollisionError(f"{schema_path.name} already exists")
    schema, data = table_bytes(table)
    if schema_path.exists():
        schema_path.unlink()
    atomic_write_bytes(data_path, data)
    atomic_write_bytes(schema_path, schema)
    return schema_path, data_path


def read_schema(id: DatasetId | str, root: str | os.PathLike) -> tuple[int, list[tuple[str, ColumnType]]]:
    schema_path, _ = _paths(id, root)
    lines = schema_path.read_text("utf-8").splitlines()
    if not lines or lines[0] != _MAGIC or len(lines) < 2 or not lines[1].startswith("#rows\t"):
        raise SchemaMismatchError(f"{schema_path.name} has no valid header")
    try:
        rows = int(lines[1].split("\t")[1])
        columns = []
        for line in lines[2:]:
            name, kind = line.split("\t")
            columns.append((name, ColumnType(kind)))
    except ValueError as exc:
        raise SchemaMismatchError(f"{schema_path.name}: {exc}") from None
    return rows, columns


def read_table(id: DatasetId | str, root: str | os.PathLike) -> ColumnTable:
    schema_path, data_path = _paths(id, root)
    if not schema_path.exists() or not data_path.exists():
        raise FileNotFoundError(f"no complete table named {schema_path.name[:-11]} under {root}")
    rows, columns = read_schema(id, root)
    text = data_path.read_text("utf-8")
    lines = text.split("\n")
    if lines[-1] != "":
        raise SchemaMismatchError(f"{data_path.name} is truncated")
    lines.pop()
    if len(lines) != rows:
        raise SchemaMismatchError(f"{data_path.name} has {len(lines)} rows, schema says {rows}")
    if not columns:
        return ColumnTable(row_count=rows)
    split = [line.split("\t") for line in lines]
    for i, parts in enumerate(split):
        if len(parts) != len(columns):
            raise SchemaMismatchError(
                f"{data_path.name} line {i + 1} has {len(parts)} fields, schema has {len(columns)}")
    by_column = list(zip(*split)) if split else [() for _ in columns]
    cols = {}
    for (name, kind), tokens in zip(columns, by_column):
        cols[name] = _parse_column(list(tokens), kind, name)
    return ColumnTable(cols, dict(columns), row_count=rows)


def stage_exists(id: DatasetId | str, root: str | os.PathLike) -> bool:
    schema_path, data_path = _paths(id, root)
    if not (schema_path.is_file() and data_path.is_file()):
        return False
    try:
        read_schema(id, root)
    except (SchemaMismatchError, OSError, UnicodeDecodeError):
        return False
    return True


def read_raw_tsv(path: str | os.PathLike, sub_separator: str = " ") -> ColumnTable:
    with open(path, "rb") as fh:
        return parse_tsv(fh, sub_separator)


def assign_row_ids(table: ColumnTable, start: int = 0) -> ColumnTable:
    """Attach a stable ``row_id`` so later stages can join their outputs."""
    if "row_id" in table:
        raise ValueError("table already carries row ids")
    ids = np.arange(start, start + table.row_count, dtype=np.int64)
    return table.with_columns({"row_id": ids}, {"row_id": ColumnType.INT})


def write_raw_tsv(table: ColumnTable, path: str | os.PathLike, sub_separator: str = " ") -> None:
    atomic_write_bytes(Path(path), serialize_tsv(table, sub_separator))


__all__ = [
    "DatasetId", "InteractionRecord", "assign_row_ids", "RAW_COLUMNS", "RAW_SCHEMA", "SchemaMismatchError",
    "TableCollisionError", "TsvParseError", "parse_tsv", "read_table", "serialize_tsv",
    "stage_exists", "write_table", "records_to_table", "table_to_records",
]
