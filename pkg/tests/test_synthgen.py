from __future__ import annotations

import numpy as np
import pytest

from ctxengage.ingest import serialize_tsv
from ctxengage.synthgen import (DAY, SynthConfig, generate, parse_config_text, split_by_week,
                                split_holdout)
from ctxengage.table import MISSING

ENGAGEMENTS = ("reply", "retweet", "quote", "like")


def test_same_seed_same_bytes():
    config = SynthConfig(seed=5, n_rows=500)
    assert serialize_tsv(generate(config)) == serialize_tsv(generate(config))
    assert serialize_tsv(generate(config)) != serialize_tsv(generate(SynthConfig(seed=6, n_rows=500)))


def test_zero_rates_give_no_engagements():
    table = generate(SynthConfig(n_rows=400, positive_rates={k: 0.0 for k in ENGAGEMENTS}))
    for kind in ENGAGEMENTS:
        assert np.all(table[f"{kind}_timestamp"] == MISSING)


def test_engagement_times_follow_the_tweet():
    table = generate(SynthConfig(n_rows=3000))
    ts = table["tweet_timestamp"]
    for kind in ENGAGEMENTS:
        col = table[f"{kind}_timestamp"]
        hit = col != MISSING
        assert np.all((col[hit] >= ts[hit]) & (col[hit] <= ts[hit] + DAY))


def test_like_rate_is_calibrated():
    table = generate(SynthConfig(seed=1, n_rows=100_000))
    rate = float(np.mean(table["like_timestamp"] != MISSING))
    assert abs(rate - 0.4) <= 0.01


def test_week_split():
    table = generate(SynthConfig(n_rows=3000))
    train, holdout = split_by_week(table)
    assert train.row_count + holdout.row_count == table.row_count
    assert not set(train["tweet_id"]) & set(holdout["tweet_id"])
    start = SynthConfig().start_ts
    assert train["tweet_timestamp"].max() < start + 7 * DAY <= holdout["tweet_timestamp"].min()
    val, test = split_holdout(holdout, seed=0)
    assert abs(val.row_count - test.row_count) <= 1
    assert val.row_count + test.row_count == holdout.row_count


def test_config_parsing_and_validation():
    config = parse_config_text("n_rows = 200\nsignal_strength = 0.8\npositive_rates.like = 0.2\n")
    assert (config.n_rows, config.signal_strength, config.positive_rates["like"]) == (200, 0.8, 0.2)
    assert config.positive_rates["reply"] == SynthConfig().positive_rates["reply"]
    with pytest.raises(ValueError):
        parse_config_text("colour = blue")
    with pytest.raises(ValueError):
        SynthConfig(signal_strength=1.5).validate()
    with pytest.raises(ValueError):
        SynthConfig(end_ts=SynthConfig().start_ts + DAY).validate()


def test_signal_reaches_the_labels():
    table = generate(SynthConfig(seed=2, n_rows=20_000, signal_strength=0.8))
    reacted = np.zeros(table.row_count, dtype=bool)
    for kind in ENGAGEMENTS:
        reacted |= table[f"{kind}_timestamp"] != MISSING
    followers = np.log1p(table["engaged_with_user_follower_count"])
    high = followers > np.median(followers)
    assert reacted[high].mean() - reacted[~high].mean() > 0.1
