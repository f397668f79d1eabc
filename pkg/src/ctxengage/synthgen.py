"""Deterministic synthetic interaction corpora.

Every random draw comes from a numpy PCG64 stream seeded by hashing
``(seed, stream name)``, so adding a new stream never perturbs existing ones.
Labels follow a logistic model of author popularity, hashtag trendiness at the
time of the tweet, the latent viewer/author affinity that drives repeated
engagement between the same pair, and viewer propensity.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from typing import Mapping

import numpy as np

from .ingest import RAW_TYPES
from .table import MISSING, ColumnTable

DAY = 86400
# Thursday 2020-02-06 00:00 UTC
DEFAULT_START = 1580947200
UNKNOWN_LANGUAGE = "B9175601E87101A984A50F8A62A1C374"
TWITTER_LAUNCH = 1142899200  # 2006-03-21
LABEL_TYPES = ("like", "reply", "retweet", "quote")
LOGIT_SCALE = 20.0  # logit standard deviation per unit of signal_strength
LABEL_WEIGHTS = {"popularity": 3.0, "affinity": 1.3, "trend": 0.9, "propensity": 0.7}


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_rows: int = 10_000
    n_viewers: int = 2_000
    n_authors: int = 800
    n_tweets: int = 6_000
    n_hashtags: int = 300
    n_links: int = 2_000
    n_domains: int = 150
    n_languages: int = 6
    start_ts: int = DEFAULT_START
    end_ts: int = DEFAULT_START + 14 * DAY
    positive_rates: Mapping[str, float] = field(
        default_factory=lambda: {"like": 0.4, "reply": 0.03, "retweet": 0.1, "quote": 0.01})
    signal_strength: float = 0.5

    def validate(self) -> None:
        for name in ("n_rows", "n_viewers", "n_authors", "n_tweets", "n_hashtags", "n_links",
                     "n_domains", "n_languages"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.end_ts - self.start_ts < 7 * DAY:
            raise ValueError("the time range must span at least 7 days")
        if self.start_ts < 0:
            raise ValueError("start_ts must be non-negative")
        unknown = set(self.positive_rates) - set(LABEL_TYPES)
        if unknown:
            raise ValueError(f"unknown engagement types in positive_rates: {sorted(unknown)}")
        for name, rate in self.positive_rates.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"rate for {name} must lie in [0, 1]")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def stream(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest[:16], "little")))


def _hex_ids(prefix: str, count: int) -> np.ndarray:
    out = np.empty(count, dtype=object)
    out[:] = [hashlib.md5(f"{prefix}{i}".encode()).hexdigest().upper() for i in range(count)]
    return out


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _calibrate_intercept(score: np.ndarray, rate: float) -> float:
    """Intercept b such that mean(sigmoid(b + score)) equals ``rate``."""
    lo, hi = -60.0, 60.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _sigmoid(mid + score).mean() < rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _standardize(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    return (x - x.mean()) / sd if sd > 0 else np.zeros_like(x, dtype=float)


def _pick_sets(rng, counts: np.ndarray, buckets: np.ndarray, weights: np.ndarray) -> list[tuple]:
    """Draw ``counts[i]`` distinct vocabulary indices per item from per-bucket weights."""
    cum = np.cumsum(weights, axis=1)
    cum /= cum[:, -1:]
    out = []
    draws = rng.random((len(counts), 6))
    for i, k in enumerate(counts):
        if k == 0:
            out.append(())
            continue
        chosen = np.searchsorted(cum[buckets[i]], draws[i, :k], side="right")
        chosen = np.minimum(chosen, weights.shape[1] - 1)
        out.append(tuple(sorted(set(int(c) for c in chosen))))
    return out


def generate(config: SynthConfig) -> ColumnTable:
    config.validate()
    seed = config.seed
    signal = config.signal_strength

    # users: authors occupy [0, n_authors), viewers start half way into the authors
    overlap = min(config.n_authors, config.n_viewers) // 2
    n_users = config.n_authors + config.n_viewers - overlap
    viewer_offset = config.n_authors - overlap
    user_ids = _hex_ids(f"{seed}-user-", n_users)
    popularity = stream(seed, "user_popularity").standard_normal(n_users)
    followers = np.floor(np.exp(4.5 + 1.4 * popularity)).astype(np.int64)
    following = np.floor(np.exp(5.0 + 0.8 * stream(seed, "user_following").standard_normal(n_users)))
    following = following.astype(np.int64)
    verified = (popularity + 0.5 * stream(seed, "user_verified").standard_normal(n_users)) > 2.0
    creation = stream(seed, "user_creation").integers(TWITTER_LAUNCH, DEFAULT_START - 30 * DAY,
                                                      n_users)
    languages = _hex_ids(f"{seed}-language-", config.n_languages)
    languages[-1] = UNKNOWN_LANGUAGE
    lang_weights = 1.0 / np.arange(1, config.n_languages + 1)
    lang_weights /= lang_weights.sum()
    user_language = stream(seed, "user_language").choice(config.n_languages, n_users, p=lang_weights)
    propensity = stream(seed, "viewer_propensity").standard_normal(n_users)

    # tweets, ordered by time so that tweet ids partition by time range
    n_tweets = config.n_tweets
    tweet_ts = np.sort(stream(seed, "tweet_timestamp").integers(config.start_ts, config.end_ts,
                                                                n_tweets))
    author_weight = np.exp(0.8 * popularity[: config.n_authors])
    tweet_author = stream(seed, "tweet_author").choice(
        config.n_authors, n_tweets, p=author_weight / author_weight.sum())
    # every author owns at least one tweet
    first = stream(seed, "tweet_author_cover").permutation(n_tweets)[: config.n_authors]
    tweet_author[first[: min(config.n_authors, n_tweets)]] = np.arange(min(config.n_authors, n_tweets))
    tweet_ids = np.empty(n_tweets, dtype=object)
    tweet_ids[:] = [f"{seed % 65536:04X}{i:028X}" for i in range(n_tweets)]
    tweet_type = stream(seed, "tweet_type").choice(
        np.array(["TopLevel", "Retweet", "Reply", "Quote"], dtype=object), n_tweets,
        p=[0.6, 0.25, 0.1, 0.05])
    lang_noise = stream(seed, "tweet_language").random(n_tweets) < 0.1
    tweet_language = np.where(lang_noise,
                              stream(seed, "tweet_language_other").integers(
                                  0, config.n_languages, n_tweets),
                              user_language[tweet_author])

    # hashtags follow trend curves: each tag peaks at a random time
    hours = (tweet_ts - config.start_ts) // 3600
    n_buckets = int((config.end_ts - config.start_ts) // 3600) + 1
    tag_peak = stream(seed, "hashtag_peak").uniform(0, n_buckets, config.n_hashtags)
    tag_width = stream(seed, "hashtag_width").uniform(3, 36, config.n_hashtags)
    tag_base = 1.0 / np.arange(1, config.n_hashtags + 1) ** 0.8
    bucket_axis = np.arange(n_buckets)[:, None]
    tag_trend = np.exp(-0.5 * ((bucket_axis - tag_peak[None, :]) / tag_width[None, :]) ** 2)
    tag_weights = 0.3 * tag_base[None, :] + 4.0 * tag_trend * tag_base[None, :] ** 0.3
    tag_counts = stream(seed, "hashtag_count").choice(4, n_tweets, p=[0.45, 0.3, 0.15, 0.1])
    tweet_tags = _pick_sets(stream(seed, "hashtag_pick"), tag_counts, hours, tag_weights)
    tag_names = _hex_ids(f"{seed}-hashtag-", config.n_hashtags)
    trend_score = np.array([max((tag_trend[h, t] for t in tags), default=0.0)
                            for h, tags in zip(hours, tweet_tags)])

    link_rng = stream(seed, "links")
    has_link = link_rng.random(n_tweets) < 0.35
    link_index = link_rng.integers(0, config.n_links, n_tweets)
    link_domain = stream(seed, "link_domain").zipf(1.6, config.n_links) % config.n_domains
    link_names = _hex_ids(f"{seed}-link-", config.n_links)
    domain_names = _hex_ids(f"{seed}-domain-", config.n_domains)

    media_rng = stream(seed, "media")
    media_kind = media_rng.choice(4, n_tweets, p=[0.55, 0.3, 0.1, 0.05])  # none/photo/video/gif
    media_many = media_rng.integers(1, 4, n_tweets)
    token_rng = stream(seed, "text_tokens")
    token_len = token_rng.integers(3, 12, n_tweets)

    # follow relations: each viewer follows a handful of authors
    viewer_activity = np.exp(0.9 * stream(seed, "viewer_activity").standard_normal(config.n_viewers))
    n_follow = 3 + stream(seed, "follow_count").geometric(0.2, config.n_viewers)
    n_follow = np.minimum(n_follow, config.n_authors)
    pair_viewer = np.repeat(np.arange(config.n_viewers), n_follow)
    pair_author = stream(seed, "follow_author").choice(
        config.n_authors, len(pair_viewer), p=author_weight / author_weight.sum())
    pairs = np.unique(pair_viewer.astype(np.int64) * config.n_authors + pair_author)
    pair_viewer, pair_author = pairs // config.n_authors, pairs % config.n_authors
    n_pairs = len(pairs)
    affinity = stream(seed, "pair_affinity").standard_normal(n_pairs)
    mutual = stream(seed, "pair_mutual").random(n_pairs) < 0.25 + 0.2 * _sigmoid(affinity)

    tweets_by_author = np.argsort(tweet_author, kind="stable")
    author_start = np.searchsorted(tweet_author[tweets_by_author], np.arange(config.n_authors))
    author_count = np.bincount(tweet_author, minlength=config.n_authors)

    # impressions: draw (pair, tweet of the pair's author), drop repeated views
    pair_weight = viewer_activity[pair_viewer] * np.exp(0.3 * popularity[pair_author])
    pair_p = pair_weight / pair_weight.sum()
    view_rng = stream(seed, "impressions")
    chosen_pairs = np.zeros(0, dtype=np.int64)
    chosen_tweets = np.zeros(0, dtype=np.int64)
    for _ in range(50):
        need = config.n_rows - len(chosen_pairs)
        if need <= 0:
            break
        batch = int(need * 1.3) + 16
        p_idx = view_rng.choice(n_pairs, batch, p=pair_p)
        a = pair_author[p_idx]
        t_idx = tweets_by_author[author_start[a] + (view_rng.random(batch) * author_count[a]).astype(np.int64)]
        all_p = np.concatenate([chosen_pairs, p_idx])
        all_t = np.concatenate([chosen_tweets, t_idx])
        key = pair_viewer[all_p] * np.int64(n_tweets) + all_t
        _, first_seen = np.unique(key, return_index=True)
        keep = np.sort(first_seen)[: config.n_rows]
        chosen_pairs, chosen_tweets = all_p[keep], all_t[keep]
    if len(chosen_pairs) < config.n_rows:
        raise ValueError("configuration admits too few distinct (viewer, tweet) impressions")
    order = np.lexsort((chosen_pairs, chosen_tweets))
    row_pair, row_tweet = chosen_pairs[order], chosen_tweets[order]
    n = config.n_rows

    row_viewer_user = viewer_offset + pair_viewer[row_pair]
    row_author_user = pair_author[row_pair]
    row_ts = tweet_ts[row_tweet]

    # label model
    w = LABEL_WEIGHTS
    score = (w["popularity"] * _standardize(popularity[row_author_user])
             + w["affinity"] * _standardize(affinity[row_pair])
             + w["trend"] * _standardize(trend_score[row_tweet])
             + w["propensity"] * _standardize(propensity[row_viewer_user]))
    score = LOGIT_SCALE * signal * score / np.sqrt(sum(v * v for v in w.values()))
    labels = {}
    for kind in LABEL_TYPES:
        rate = float(config.positive_rates.get(kind, 0.0))
        extra = 0.8 * signal * mutual[row_pair] if kind in ("reply", "quote") else 0.0
        s = score + extra
        u = stream(seed, f"label_{kind}").random(n)
        if rate <= 0.0:
            labels[kind] = np.zeros(n, dtype=bool)
        elif rate >= 1.0:
            labels[kind] = np.ones(n, dtype=bool)
        else:
            labels[kind] = u < _sigmoid(_calibrate_intercept(s, rate) + s)

    def engagement_ts(kind: str) -> np.ndarray:
        delay = stream(seed, f"delay_{kind}").integers(0, DAY + 1, n)
        return np.where(labels[kind], row_ts + delay, MISSING)

    media_names = ("Photo", "Video", "GIF")
    tokens_for_tweet = [
        " ".join(["101"] + [str(v) for v in token_rng.integers(1000, 30000, k)] + ["102"])
        for k in token_len
    ]
    media_for_tweet = [() if m == 0 else (media_names[m - 1],) * int(c)
                       for m, c in zip(media_kind, media_many)]
    tags_for_tweet = [tuple(sorted(tag_names[t] for t in tags)) for tags in tweet_tags]
    links_for_tweet = [(link_names[li],) if h else () for h, li in zip(has_link, link_index)]
    domains_for_tweet = [(domain_names[link_domain[li]],) if h else ()
                         for h, li in zip(has_link, link_index)]

    def per_row(values):
        out = np.empty(n, dtype=object)
        out[:] = [values[t] for t in row_tweet]
        return out

    columns = {
        "text_tokens": per_row(tokens_for_tweet),
        "hashtags": per_row(tags_for_tweet),
        "tweet_id": tweet_ids[row_tweet],
        "present_media": per_row(media_for_tweet),
        "present_links": per_row(links_for_tweet),
        "present_domains": per_row(domains_for_tweet),
        "tweet_type": tweet_type[row_tweet],
        "language": languages[tweet_language[row_tweet]],
        "tweet_timestamp": row_ts,
        "engaged_with_user_id": user_ids[row_author_user],
        "engaged_with_user_follower_count": followers[row_author_user],
        "engaged_with_user_following_count": following[row_author_user],
        "engaged_with_user_is_verified": verified[row_author_user],
        "engaged_with_user_account_creation": creation[row_author_user],
        "engaging_user_id": user_ids[row_viewer_user],
        "engaging_user_follower_count": followers[row_viewer_user],
        "engaging_user_following_count": following[row_viewer_user],
        "engaging_user_is_verified": verified[row_viewer_user],
        "engaging_user_account_creation": creation[row_viewer_user],
        "engagee_follows_engager": mutual[row_pair],
        "reply_timestamp": engagement_ts("reply"),
        "retweet_timestamp": engagement_ts("retweet"),
        "quote_timestamp": engagement_ts("quote"),
        "like_timestamp": engagement_ts("like"),
    }
    return ColumnTable(columns, RAW_TYPES, row_count=n)


def utc_day(ts) -> np.ndarray:
    return np.asarray(ts, dtype=np.int64) // DAY


def split_by_week(table: ColumnTable) -> tuple[ColumnTable, ColumnTable]:
    """First seven UTC days versus the following seven."""
    if table.row_count == 0:
        raise ValueError("cannot split an empty table")
    days = utc_day(table["tweet_timestamp"])
    first_day = int(days.min())
    if int(days.max()) - first_day + 1 < 14:
        raise ValueError("splitting by week needs at least 14 UTC days of data")
    train_mask = days < first_day + 7
    holdout_mask = (days >= first_day + 7) & (days < first_day + 14)
    train, holdout = table.filter(train_mask), table.filter(holdout_mask)
    shared = set(train["tweet_id"].tolist()) & set(holdout["tweet_id"].tolist())
    if shared:
        raise ValueError(f"{len(shared)} tweet ids appear in both weeks")
    return train, holdout


def split_holdout(holdout: ColumnTable, seed: int) -> tuple[ColumnTable, ColumnTable]:
    """Deterministic half/half split of the holdout week into val and test."""
    order = stream(seed, "holdout_split").permutation(holdout.row_count)
    half = holdout.row_count // 2
    val_rows = np.sort(order[:half])
    test_rows = np.sort(order[half:])
    return holdout.take(val_rows), holdout.take(test_rows)


def parse_config_text(text: str) -> SynthConfig:
    """Parse ``key = value`` lines; ``positive_rates.like = 0.4`` sets one rate."""
    known = {f.name: f for f in fields(SynthConfig)}
    values: dict[str, object] = {}
    rates = dict(SynthConfig().positive_rates)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("positive_rates."):
            rates[key.split(".", 1)[1]] = float(value)
        elif key in known and key != "positive_rates":
            values[key] = float(value) if key == "signal_strength" else int(value)
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return SynthConfig(positive_rates=rates, **values)
