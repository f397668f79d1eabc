"""Binary engagement labels and simple per-row encodings."""
from __future__ import annotations

import logging
from collections import Counter

import numpy as np

from .table import MISSING, ColumnTable, ColumnType

log = logging.getLogger(__name__)

TARGETS = ("like", "reply", "retweet", "quote", "react")
UNKNOWN_LANGUAGE = "B9175601E87101A984A50F8A62A1C374"
# months from 1970-01 to 2006-03
_AGE_EPOCH_MONTHS = (2006 - 1970) * 12 + 2


def derive_labels(table: ColumnTable) -> ColumnTable:
    labels = {}
    for kind in ("like", "reply", "retweet", "quote"):
        labels[kind] = (table[f"{kind}_timestamp"] != MISSING).astype(np.int64)
    labels["react"] = labels["like"] | labels["reply"] | labels["retweet"] | labels["quote"]
    return table.with_columns(labels, {k: ColumnType.INT for k in labels})


def _lengths(column: np.ndarray) -> np.ndarray:
    return np.fromiter((len(v) for v in column), dtype=np.int64, count=len(column))


def encode_media_and_elements(table: ColumnTable) -> ColumnTable:
    media = table["present_media"]
    counts = {
        "photos_count": np.fromiter((v.count("Photo") for v in media), np.int64, len(media)),
        "videos_count": np.fromiter((v.count("Video") for v in media), np.int64, len(media)),
        "gif_count": np.fromiter((v.count("GIF") for v in media), np.int64, len(media)),
    }
    counts["media_count"] = counts["photos_count"] + counts["videos_count"] + counts["gif_count"]
    counts["hashtags_count"] = _lengths(table["hashtags"])
    counts["links_count"] = _lengths(table["present_links"])
    counts["domains_count"] = _lengths(table["present_domains"])
    return table.with_columns(counts, {k: ColumnType.INT for k in counts})


def weekday_thursday_first(ts) -> np.ndarray:
    # 1970-01-01 was a Thursday
    return np.asarray(ts, dtype=np.int64) // 86400 % 7 + 1


def encode_time(table: ColumnTable) -> ColumnTable:
    ts = table["tweet_timestamp"]
    return table.with_columns({"tweet_weekday": weekday_thursday_first(ts),
                               "tweet_hour": ts // 3600 % 24},
                              {"tweet_weekday": ColumnType.INT, "tweet_hour": ColumnType.INT})


def _months_since_1970(ts: np.ndarray) -> np.ndarray:
    return np.asarray(ts, dtype=np.int64).astype("datetime64[s]").astype("datetime64[M]").astype(np.int64)


def months_since_march_2006(ts, warnings: Counter | None = None) -> np.ndarray:
    """Calendar months since 2006-03 (UTC), clamped at zero."""
    age = _months_since_1970(np.asarray(ts)) - _AGE_EPOCH_MONTHS
    early = int((age < 0).sum())
    if early:
        log.warning("%d account creation times precede March 2006; clamped to 0", early)
        if warnings is not None:
            warnings["creation_before_2006_03"] += early
    return np.maximum(age, 0)


def encode_ages(table: ColumnTable, warnings: Counter | None = None) -> ColumnTable:
    out = {}
    for side, prefix in (("engaged", "engaged_with_user"), ("engaging", "engaging_user")):
        created = table[f"{prefix}_account_creation"]
        out[f"{side}_creation_year"] = created.astype("datetime64[s]").astype("datetime64[Y]").astype(np.int64) + 1970
        out[f"{side}_age"] = months_since_march_2006(created, warnings)
    out["creation_age_difference"] = out["engaged_age"] - out["engaging_age"]
    order = ["engaged_creation_year", "engaging_creation_year", "engaged_age", "engaging_age",
             "creation_age_difference"]
    return table.with_columns({k: out[k] for k in order}, {k: ColumnType.INT for k in order})


def encode_language_flag(table: ColumnTable) -> ColumnTable:
    flag = (table["language"] == UNKNOWN_LANGUAGE).astype(np.int64)
    return table.with_columns({"language_unknown": flag}, {"language_unknown": ColumnType.INT})


def label_stage(table: ColumnTable) -> ColumnTable:
    """Output of the FE_ stage."""
    return derive_labels(table)


def encoding_stage(table: ColumnTable, warnings: Counter | None = None) -> ColumnTable:
    """Output of the Encoding_ stage."""
    table = encode_media_and_elements(table)
    table = encode_time(table)
    table = encode_ages(table, warnings)
    return encode_language_flag(table)
