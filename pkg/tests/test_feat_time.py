from __future__ import annotations

import numpy as np
import pytest

from conftest import event_table
from ctxengage.feat_time import (HISTORY_FLAG, WindowSpec, element_frequency, oracle_frequencies,
                                 prepend_history_48h, time_stage, view_counts, windowed_key_counts)
from ctxengage.registry import WINDOW_SECONDS, WINDOW_SUFFIXES
from ctxengage.table import ColumnTable, ColumnType

HOUR = 3600


def tiny(ts, viewers, hashtags) -> ColumnTable:
    n = len(ts)
    sets = np.empty(n, dtype=object)
    sets[:] = [tuple(h) for h in hashtags]
    empty = np.empty(n, dtype=object)
    empty[:] = [()] * n
    return ColumnTable({"tweet_timestamp": np.asarray(ts, dtype=np.int64),
                        "engaging_user_id": list(viewers),
                        "engaged_with_user_id": ["a"] * n, "hashtags": sets,
                        "present_links": empty, "present_domains": empty.copy()},
                       {"hashtags": ColumnType.SET, "present_links": ColumnType.SET,
                        "present_domains": ColumnType.SET})


def brute_key_counts(keys, ts, window):
    return [sum(1 for j in range(len(ts)) if keys[j] == keys[i] and 0 < ts[i] - ts[j] <= window)
            for i in range(len(ts))]


def brute_element_counts(sets, ts, window, group=None):
    out = []
    for i in range(len(ts)):
        total = 0
        for e in sets[i]:
            total += sum(1 for j in range(len(ts)) if e in sets[j] and 0 < ts[i] - ts[j] <= window
                         and (group is None or group[j] == group[i]))
        out.append(total)
    return out


def test_window_table():
    assert WINDOW_SECONDS == (1800, 3600, 7200, 43200, 86400, 172800)
    assert WINDOW_SUFFIXES == ("05h", "1h", "2h", "12h", "24h", "48h")
    with pytest.raises(ValueError):
        WindowSpec((10, 5), ("a", "b"))


def test_lone_row_counts_nothing():
    out = element_frequency(tiny([1000], ["v"], [["x"]]), "hashtags")
    assert all(out[f"hashtags_frequency_{s}"][0] == 0 for s in WINDOW_SUFFIXES)
    assert view_counts(tiny([1000], ["v"], [[]]))["engaging_saw_tweets_count_48h"][0] == 0


def test_two_views_ten_minutes_apart():
    out = view_counts(tiny([0, 600], ["v", "v"], [[], []]))
    assert out["engaging_saw_tweets_count_05h"].tolist() == [0, 1]
    assert out["engaging_saw_tweets_count_48h"].tolist() == [0, 1]


def test_shared_hashtag_one_hour_apart():
    out = element_frequency(tiny([0, HOUR], ["v", "w"], [["x"], ["x", "y"]]), "hashtags")
    assert out["hashtags_frequency_2h"].tolist() == [0, 1]
    assert out["hashtags_frequency_1h"].tolist() == [0, 1]
    assert out["hashtags_frequency_05h"].tolist() == [0, 0]
    assert out["user_hashtags_frequency_48h"].tolist() == [0, 0]


def test_same_timestamp_rows_never_count_each_other():
    out = view_counts(tiny([50, 50, 50], ["v"] * 3, [[]] * 3))
    assert out["engaging_saw_tweets_count_48h"].tolist() == [0, 0, 0]


@pytest.mark.parametrize("seed", range(5))
def test_key_counts_match_pairwise_scan(seed):
    table = event_table(np.random.default_rng(seed), 300)
    ts = table["tweet_timestamp"]
    keys = table["engaging_user_id"]
    got = windowed_key_counts(np.unique(keys, return_inverse=True)[1], ts)
    for window, values in zip(WINDOW_SECONDS, got):
        assert values.tolist() == brute_key_counts(keys, ts, window)


@pytest.mark.parametrize("seed", range(3))
def test_element_counts_match_posting_scan(seed):
    table = event_table(np.random.default_rng(10 + seed), 250)
    ts = table["tweet_timestamp"]
    viewers = table["engaging_user_id"]
    for element, column in (("hashtags", "hashtags"), ("domains", "present_domains")):
        out = element_frequency(table, element)
        sets = [set(s) for s in table[column]]
        for window, suffix in zip(WINDOW_SECONDS, WINDOW_SUFFIXES):
            assert out[f"{element}_frequency_{suffix}"].tolist() == \
                brute_element_counts(sets, ts, window)
            assert out[f"user_{element}_frequency_{suffix}"].tolist() == \
                brute_element_counts(sets, ts, window, viewers)


def test_counts_grow_with_the_window_and_stay_below_oracle():
    table = event_table(np.random.default_rng(20), 2000)
    out = oracle_frequencies(view_counts(element_frequency(table, "links")))
    for prefix in ("links_frequency", "user_links_frequency", "engaging_saw_tweets_count",
                   "engageds_tweets_views_count"):
        series = [out[f"{prefix}_{s}"] for s in WINDOW_SUFFIXES]
        for narrow, wide in zip(series, series[1:]):
            assert np.all(narrow <= wide)
        assert np.all(series[-1] <= out[prefix])


def test_oracle_counts_match_group_by():
    table = event_table(np.random.default_rng(21), 400)
    out = oracle_frequencies(table)
    viewers = table["engaging_user_id"].tolist()
    assert out["engaging_saw_tweets_count"].tolist() == [viewers.count(v) - 1 for v in viewers]
    sets = [set(s) for s in table["hashtags"]]
    expected = [sum(sum(1 for j, other in enumerate(sets) if j != i and e in other) for e in s)
                for i, s in enumerate(sets)]
    assert out["hashtags_frequency"].tolist() == expected


def test_shifting_all_timestamps_changes_nothing():
    table = event_table(np.random.default_rng(22), 500)
    shifted = table.with_columns({"tweet_timestamp": table["tweet_timestamp"] + 12_345})
    a, b = view_counts(table), view_counts(shifted)
    for s in WINDOW_SUFFIXES:
        assert np.array_equal(a[f"engaging_saw_tweets_count_{s}"], b[f"engaging_saw_tweets_count_{s}"])


def test_prepend_history_keeps_the_last_48_hours():
    rng = np.random.default_rng(23)
    train = event_table(rng, 600, span=6 * 86400)
    last = int(train["tweet_timestamp"].max())
    target = event_table(rng, 200)
    target = target.with_columns({"tweet_timestamp": target["tweet_timestamp"] - 1_581_000_000
                                  + last + 60})
    combined = prepend_history_48h(train, target)
    history = combined.filter(combined[HISTORY_FLAG])
    assert history.row_count == int(np.sum(train["tweet_timestamp"] >= last - 172800))
    assert combined.row_count == history.row_count + target.row_count
    assert not combined[HISTORY_FLAG][-target.row_count:].any()
    with pytest.raises(ValueError):
        prepend_history_48h(target, train)


def test_time_stage_keeps_target_rows_and_uses_history():
    rng = np.random.default_rng(24)
    train = event_table(rng, 300, n_viewers=5)
    start = int(train["tweet_timestamp"].max()) + 1
    target = tiny([start + 10], [train["engaging_user_id"][-1]], [[]])
    train = train.select(target.names)
    alone = time_stage(target)
    joined = time_stage(target, train)
    assert joined.row_count == 1 and HISTORY_FLAG not in joined
    assert alone["engaging_saw_tweets_count_48h"][0] == 0
    viewer = target["engaging_user_id"][0]
    expected = int(np.sum((train["engaging_user_id"] == viewer)
                          & (train["tweet_timestamp"] >= start + 10 - 172800)))
    assert joined["engaging_saw_tweets_count_48h"][0] == expected
