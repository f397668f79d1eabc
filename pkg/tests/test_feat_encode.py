from __future__ import annotations

import calendar
from collections import Counter
from datetime import datetime, timezone

import numpy as np

from ctxengage.feat_encode import (UNKNOWN_LANGUAGE, derive_labels, encode_ages,
                                   encode_language_flag, encode_media_and_elements,
                                   months_since_march_2006, weekday_thursday_first)
from ctxengage.table import MISSING, ColumnTable, ColumnType


def utc(*parts) -> int:
    return calendar.timegm(datetime(*parts, tzinfo=timezone.utc).timetuple())


def test_labels():
    table = ColumnTable({f"{k}_timestamp": [MISSING, MISSING, 5] if k == "quote" else [MISSING] * 3
                         for k in ("like", "reply", "retweet", "quote")},
                        {f"{k}_timestamp": ColumnType.OPT_INT
                         for k in ("like", "reply", "retweet", "quote")})
    out = derive_labels(table)
    row = lambda i: tuple(int(out[k][i]) for k in ("like", "reply", "retweet", "quote", "react"))
    assert row(0) == (0, 0, 0, 0, 0)
    assert row(2) == (0, 0, 0, 1, 1)


def test_react_dominates_each_type(encoded_corpus):
    react = encoded_corpus["react"].sum()
    assert all(react >= encoded_corpus[k].sum() for k in ("like", "reply", "retweet", "quote"))


def test_media_and_element_counts():
    table = ColumnTable({"present_media": [("Photo", "Photo", "Video"), ()],
                         "hashtags": [("a", "b", "c", "d"), ()], "present_links": [(), ()],
                         "present_domains": [("x",), ()]},
                        {"present_media": ColumnType.LIST, "hashtags": ColumnType.SET,
                         "present_links": ColumnType.SET, "present_domains": ColumnType.SET})
    out = encode_media_and_elements(table)
    assert [out[k][0] for k in ("photos_count", "videos_count", "gif_count", "media_count")] == \
        [2, 1, 0, 3]
    assert out["hashtags_count"].tolist() == [4, 0]
    assert all(out[k][1] == 0 for k in ("photos_count", "media_count", "domains_count"))


def test_weekday_and_hour():
    assert weekday_thursday_first([utc(2020, 2, 6)]).tolist() == [1]
    assert weekday_thursday_first([utc(2020, 2, 12, 23, 59)]).tolist() == [7]
    rng = np.random.default_rng(0)
    ts = rng.integers(0, 2 * 10**9, 1000)
    assert np.array_equal(weekday_thursday_first(ts), weekday_thursday_first(ts + 7 * 86400))
    # calendar oracle: Python's weekday() has Monday = 0, Thursday = 3
    expected = [(datetime.fromtimestamp(int(t), timezone.utc).weekday() - 3) % 7 + 1 for t in ts]
    assert weekday_thursday_first(ts).tolist() == expected


def test_account_age_months():
    assert months_since_march_2006([utc(2006, 3, 15)]).tolist() == [0]
    assert months_since_march_2006([utc(2007, 3, 1)]).tolist() == [12]
    rng = np.random.default_rng(1)
    ts = rng.integers(utc(2006, 3, 1), utc(2020, 1, 1), 500)
    expected = []
    for t in ts:
        d = datetime.fromtimestamp(int(t), timezone.utc)
        expected.append((d.year - 2006) * 12 + d.month - 3)
    assert months_since_march_2006(ts).tolist() == expected


def test_ages_clamp_and_warn():
    warnings: Counter = Counter()
    table = ColumnTable({"engaged_with_user_account_creation": [utc(2005, 1, 1), utc(2010, 3, 1)],
                         "engaging_user_account_creation": [utc(2010, 3, 1), utc(2010, 3, 20)]})
    out = encode_ages(table, warnings)
    assert out["engaged_age"].tolist() == [0, 48]
    assert out["creation_age_difference"].tolist() == [0 - 48, 0]
    assert out["engaged_creation_year"].tolist() == [2005, 2010]
    assert warnings["creation_before_2006_03"] == 1


def test_language_flag():
    table = ColumnTable({"language": [UNKNOWN_LANGUAGE, "abc", ""]})
    assert encode_language_flag(table)["language_unknown"].tolist() == [1, 0, 0]
    assert UNKNOWN_LANGUAGE == "B917-5601-E871-01A9-84A5-0F8A-62A1-C374".replace("-", "")
