from __future__ import annotations

import numpy as np
import pytest

from ctxengage.ingest import (RAW_COLUMNS, DatasetId, SchemaMismatchError, TableCollisionError,
                              TsvParseError, assign_row_ids, parse_tsv, read_table, serialize_tsv,
                              stage_exists, write_table)
from ctxengage.table import MISSING, ColumnTable, ColumnType

ROW = ["tok1 tok2", "h1 h2", "t1", "Photo Video GIF", "l1", "d1", "TopLevel", "en", "1581000000",
       "a1", "10", "20", "true", "1300000000", "v1", "5", "6", "false", "1400000000", "true",
       "1581000000", "", "", ""]


def line(fields):
    return "\t".join(fields) + "\n"


def hand_fixture() -> bytes:
    rows = [list(ROW), list(ROW), list(ROW)]
    rows[1][2], rows[1][3], rows[1][6] = "t2", "Photo Photo", "Retweet"
    rows[2][2], rows[2][3], rows[2][6] = "t3", "", "Quote"
    rows[2][1] = ""
    rows[0][6] = "Reply"
    return "".join(line(r) for r in rows).encode()


def test_optional_engagement_fields():
    table = parse_tsv(line(ROW).encode())
    assert table["like_timestamp"][0] == MISSING
    assert table["reply_timestamp"][0] == 1581000000
    assert table["present_media"][0] == ("Photo", "Video", "GIF")


def test_empty_input():
    assert parse_tsv(b"").row_count == 0


def test_round_trip_is_byte_identical():
    raw = hand_fixture()
    table = parse_tsv(raw)
    assert set(table["tweet_type"]) == {"Reply", "Retweet", "Quote"}
    assert serialize_tsv(table) == raw
    assert parse_tsv(serialize_tsv(table)) == table


def test_parse_errors_carry_position():
    bad = list(ROW)
    bad[6] = "Tweet"
    with pytest.raises(TsvParseError) as info:
        parse_tsv(line(ROW).encode() + line(bad).encode())
    assert (info.value.line, info.value.field) == (2, 6)
    with pytest.raises(TsvParseError) as info:
        parse_tsv(line(ROW[:10]).encode())
    assert info.value.line == 1
    bad = list(ROW)
    bad[3] = "Photo Sticker"
    with pytest.raises(TsvParseError):
        parse_tsv(line(bad).encode())


def test_alternate_sub_separator():
    row = list(ROW)
    row[1], row[3] = "h1,h2", "Photo,Video"
    table = parse_tsv(line(row).encode(), sub_separator=",")
    assert table["hashtags"][0] == ("h1", "h2")
    assert len(RAW_COLUMNS) == 24


def random_table(rng, n=100) -> ColumnTable:
    return ColumnTable({
        "i": rng.integers(-5, 10**12, n),
        "f": rng.standard_normal(n) * 10.0 ** rng.integers(-20, 20, n),
        "b": rng.random(n) < 0.5,
        "s": [f"x{v}" for v in rng.integers(0, 9, n)],
        "set": [tuple(sorted({f"e{v}" for v in rng.integers(0, 5, k)})) for k in rng.integers(0, 4, n)],
        "o": np.where(rng.random(n) < 0.3, MISSING, rng.integers(0, 100, n)),
    }, {"i": ColumnType.INT, "f": ColumnType.FLOAT, "b": ColumnType.BOOL, "s": ColumnType.STR,
        "set": ColumnType.SET, "o": ColumnType.OPT_INT})


def test_write_read_round_trip(tmp_path):
    table = random_table(np.random.default_rng(0))
    d = DatasetId("train", "EU", 5, "Final_")
    write_table(table, d, tmp_path)
    assert stage_exists(d, tmp_path)
    assert read_table(d, tmp_path) == table
    with pytest.raises(TableCollisionError):
        write_table(table, d, tmp_path)
    write_table(table, d, tmp_path, overwrite=True)


def test_stage_exists_and_tampering(tmp_path):
    table = random_table(np.random.default_rng(1), 10)
    d = DatasetId("val")
    assert not stage_exists(d, tmp_path)
    schema, data = write_table(table, d, tmp_path)
    schema.write_text(schema.read_text().replace("#rows\t10", "#rows\t11"))
    with pytest.raises(SchemaMismatchError):
        read_table(d, tmp_path)
    write_table(table, d, tmp_path, overwrite=True)
    data.unlink()
    assert not stage_exists(d, tmp_path)


def test_dataset_names():
    d = DatasetId("train", "EWU", 10, "Final_")
    assert d.name == "Final_train_EWU_sample_10pct"
    assert DatasetId.parse("Final_train_EWU_sample_10pct", "Final_") == d
    assert DatasetId.parse("val+test_inter_EWU+EU_sample_1pct").technique == "inter_EWU+EU"
    assert DatasetId("test").name == "test"
    with pytest.raises(ValueError):
        DatasetId("train", "full", 10)


def test_assign_row_ids():
    table = assign_row_ids(ColumnTable({"x": [3, 4, 5]}), start=7)
    assert table["row_id"].tolist() == [7, 8, 9]
    with pytest.raises(ValueError):
        assign_row_ids(table)
