"""Immutable named-column tables backed by numpy arrays."""
from __future__ import annotations

from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

# absent optional integers (engagement timestamps) are stored as this value
MISSING = -1


class ColumnType(str, Enum):
    INT = "int64"
    FLOAT = "float64"
    BOOL = "bool"
    STR = "str"
    SET = "strset"  # sorted, duplicate-free tuples of tokens
    LIST = "strlist"  # ordered tuples, duplicates kept
    OPT_INT = "int64?"  # int64 with MISSING for absent values


_OBJECT_TYPES = (ColumnType.STR, ColumnType.SET, ColumnType.LIST)


def _object_array(values: Iterable) -> np.ndarray:
    values = list(values)
    out = np.empty(len(values), dtype=object)
    out[:] = values
    return out


def coerce_column(values, kind: ColumnType) -> np.ndarray:
    """Convert ``values`` into the canonical numpy storage for ``kind``."""
    if kind in (ColumnType.INT, ColumnType.OPT_INT):
        arr = np.asarray(values, dtype=np.int64)
    elif kind is ColumnType.FLOAT:
        arr = np.asarray(values, dtype=np.float64)
    elif kind is ColumnType.BOOL:
        arr = np.asarray(values, dtype=bool)
    elif kind is ColumnType.STR:
        arr = _object_array(str(v) for v in values)
    elif kind is ColumnType.SET:
        arr = _object_array(tuple(sorted(set(v))) for v in values)
    elif kind is ColumnType.LIST:
        arr = _object_array(tuple(v) for v in values)
    else:  # pragma: no cover
        raise ValueError(f"unknown column type {kind!r}")
    if arr.ndim != 1:
        raise ValueError("columns must be one-dimensional")
    return arr


def infer_type(values) -> ColumnType:
    arr = np.asarray(values) if not isinstance(values, np.ndarray) else values
    if arr.dtype == bool:
        return ColumnType.BOOL
    if np.issubdtype(arr.dtype, np.integer):
        return ColumnType.INT
    if np.issubdtype(arr.dtype, np.floating):
        return ColumnType.FLOAT
    if arr.dtype.kind == "U":
        return ColumnType.STR
    if arr.dtype == object:
        if len(arr) and isinstance(arr[0], tuple):
            return ColumnType.SET
        return ColumnType.STR
    raise TypeError(f"cannot infer column type for dtype {arr.dtype}")


class ColumnTable:
    """Ordered mapping of column name to a typed, read-only numpy column."""

    __slots__ = ("_columns", "_types", "_rows")

    def __init__(self, columns: Mapping[str, object] | None = None,
                 types: Mapping[str, ColumnType] | None = None,
                 row_count: int | None = None):
        columns = dict(columns or {})
        types = dict(types or {})
        self._columns: dict[str, np.ndarray] = {}
        self._types: dict[str, ColumnType] = {}
        for name, values in columns.items():
            kind = ColumnType(types[name]) if name in types else infer_type(values)
            if isinstance(values, np.ndarray) and _already_canonical(values, kind):
                arr = values
            else:
                arr = coerce_column(values, kind)
            if arr.flags.writeable:
                arr = arr.copy()
                arr.flags.writeable = False
            self._columns[name] = arr
            self._types[name] = kind
        lengths = {len(a) for a in self._columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have different lengths: {sorted(lengths)}")
        if lengths:
            n = lengths.pop()
            if row_count is not None and row_count != n:
                raise ValueError(f"row_count {row_count} does not match column length {n}")
            self._rows = n
        else:
            self._rows = int(row_count or 0)

    # basic protocol ------------------------------------------------------
    @property
    def names(self) -> list[str]:
        return list(self._columns)

    @property
    def types(self) -> dict[str, ColumnType]:
        return dict(self._types)

    @property
    def row_count(self) -> int:
        return self._rows

    def __len__(self) -> int:
        return self._rows

    def __contains__(self, name: object) -> bool:
        return name in self._columns

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._columns[name]
        except KeyError:
            raise KeyError(f"no column named {name!r}") from None

    def type_of(self, name: str) -> ColumnType:
        return self._types[name]

    def __repr__(self) -> str:
        return f"ColumnTable(rows={self._rows}, columns={len(self._columns)})"

    def equals(self, other: "ColumnTable") -> bool:
        if not isinstance(other, ColumnTable):
            return False
        if self.names != other.names or self._types != other._types or self._rows != other._rows:
            return False
        for name, arr in self._columns.items():
            theirs = other._columns[name]
            if self._types[name] is ColumnType.FLOAT:
                if not np.array_equal(arr, theirs, equal_nan=True):
                    return False
            elif not np.array_equal(arr, theirs):
                return False
        return True

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ColumnTable) and self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    # derivation ---------------------------------------------------------
    def with_columns(self, columns: Mapping[str, object],
                     types: Mapping[str, ColumnType] | None = None) -> "ColumnTable":
        """Return a copy with ``columns`` added (or replaced in place)."""
        merged = dict(self._columns)
        merged_types = dict(self._types)
        types = dict(types or {})
        for name, values in columns.items():
            merged[name] = values
            if name in types:
                merged_types[name] = ColumnType(types[name])
            else:
                merged_types[name] = infer_type(values)
        return ColumnTable(merged, merged_types, row_count=self._rows if not merged else None)

    def select(self, names: Sequence[str]) -> "ColumnTable":
        return ColumnTable({n: self[n] for n in names}, {n: self._types[n] for n in names},
                           row_count=self._rows)

    def drop(self, names: Iterable[str]) -> "ColumnTable":
        gone = set(names)
        return self.select([n for n in self.names if n not in gone])

    def take(self, indices) -> "ColumnTable":
        idx = np.asarray(indices, dtype=np.int64)
        return ColumnTable({n: a[idx] for n, a in self._columns.items()}, self._types,
                           row_count=len(idx))

    def filter(self, mask) -> "ColumnTable":
        mask = np.asarray(mask, dtype=bool)
        if len(mask) != self._rows:
            raise ValueError("mask length does not match row count")
        return self.take(np.flatnonzero(mask))

    @classmethod
    def concat(cls, tables: Sequence["ColumnTable"]) -> "ColumnTable":
        tables = [t for t in tables]
        if not tables:
            return cls()
        first = tables[0]
        for t in tables[1:]:
            if t.names != first.names or t._types != first._types:
                raise ValueError("cannot concatenate tables with different schemas")
        cols = {}
        for name in first.names:
            parts = [t[name] for t in tables]
            cols[name] = np.concatenate(parts) if parts else parts
        return cls(cols, first._types, row_count=sum(len(t) for t in tables))


def _already_canonical(arr: np.ndarray, kind: ColumnType) -> bool:
    if arr.ndim != 1:
        return False
    if kind in (ColumnType.INT, ColumnType.OPT_INT):
        return arr.dtype == np.int64
    if kind is ColumnType.FLOAT:
        return arr.dtype == np.float64
    if kind is ColumnType.BOOL:
        return arr.dtype == bool
    # object columns are spot-checked rather than rebuilt element by element
    if arr.dtype != object:
        return False
    if len(arr) == 0:
        return True
    expected = str if kind is ColumnType.STR else tuple
    return isinstance(arr[0], expected) and isinstance(arr[-1], expected)
