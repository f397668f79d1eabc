"""Names of the 185 model features and the 8 whole-corpus oracle features."""
from __future__ import annotations

TARGETS = ("like", "reply", "retweet", "quote", "react")
ELEMENTS = ("hashtags", "links", "domains")
WINDOW_SECONDS = (1800, 3600, 7200, 43200, 86400, 172800)
WINDOW_SUFFIXES = ("05h", "1h", "2h", "12h", "24h", "48h")
POLARITIES = ("positive", "negative")

RAW_FEATURES = [
    "tweet_type", "language", "engaged_with_user_follower_count",
    "engaged_with_user_following_count", "engaged_with_user_is_verified",
    "engaging_user_follower_count", "engaging_user_following_count", "engaging_user_is_verified",
    "engagee_follows_engager",
]


def graph_engagement_columns() -> list[str]:
    names = []
    for degree in ("1d", "2d"):
        for side, other in (("engaging", "engaged"), ("engaged", "engaging")):
            for kind in ("flag", "count"):
                names += [f"graph_{side}_{kind}_{t}_from_{other}_{degree}" for t in TARGETS]
    return names


GRAPH_FEATURES = ["graph_engagee_follows_engager_2d", "graph_engager_follows_engagee_2d",
                  *graph_engagement_columns()]
GRAPH_RATIO_FEATURES = ["ratio_engaged_to_engaging_follower_counts",
                        "ratio_engaged_to_engaging_following_counts"]

TIME_FEATURES = (
    [f"{e}_frequency_{w}" for w in WINDOW_SUFFIXES for e in ELEMENTS]
    + [f"user_{e}_frequency_{w}" for w in WINDOW_SUFFIXES for e in ELEMENTS]
    + [f"engaging_saw_tweets_count_{w}" for w in WINDOW_SUFFIXES]
    + [f"engageds_tweets_views_count_{w}" for w in WINDOW_SUFFIXES]
)

USER_RATIO_FEATURES = [f"ratio_all_to_{side}_count_{pol}_tweets_{t}"
                       for side in ("engaging", "engaged_with")
                       for pol in POLARITIES for t in TARGETS]
ELEMENT_RATIO_FEATURES = [
    name
    for e in ELEMENTS
    for name in ([f"ratio_all_to_{e}_count_{pol}_tweets_{t}" for pol in POLARITIES for t in TARGETS]
                 + [f"ratio_all_to_{e}_user_proxy_count_{pol}_tweets_{t}"
                    for pol in POLARITIES for t in TARGETS])
]
ENGAGEMENT_RATIO_FEATURES = USER_RATIO_FEATURES + ELEMENT_RATIO_FEATURES
LANGUAGE_FEATURES = ["this_language_seen_count", "this_language_authored_count"]
LANGUAGE_RATIO_FEATURES = ["ratio_seen_tweets_in_this_langauge_to_total_seen_tweets",
                           "ratio_authored_tweets_in_this_langauge_to_total_authored_tweets"]

FEATURE_GROUPS = {
    "raw": RAW_FEATURES,
    "graph-based": GRAPH_FEATURES,
    "graph-based ratios": GRAPH_RATIO_FEATURES,
    "time": TIME_FEATURES,
    "engagement ratios": ENGAGEMENT_RATIO_FEATURES,
    "languages": LANGUAGE_FEATURES,
    "language ratios": LANGUAGE_RATIO_FEATURES,
}
FEATURES = [name for group in FEATURE_GROUPS.values() for name in group]
ORACLE_FEATURES = ["hashtags_frequency", "links_frequency", "domains_frequency",
                   "user_hashtags_frequency", "user_links_frequency", "user_domains_frequency",
                   "engaging_saw_tweets_count", "engageds_tweets_views_count"]

# columns carried through to the Final_ table besides features and labels
KEY_COLUMNS = ["row_id", "tweet_id", "engaging_user_id", "engaged_with_user_id", "tweet_timestamp"]

STRING_FEATURES = frozenset({"tweet_type", "language"})
# small-domain features that are never binned
UNBINNED_FEATURES = frozenset(
    {"engaged_with_user_is_verified", "engaging_user_is_verified", "engagee_follows_engager",
     "graph_engagee_follows_engager_2d", "graph_engager_follows_engagee_2d"}
    | {n for n in GRAPH_FEATURES if "_flag_" in n}
)

assert len(FEATURES) == 185 and len(set(FEATURES)) == 185
assert len(ORACLE_FEATURES) == 8


def feature_set(note: str) -> list[str]:
    if note == "scaled":
        return list(FEATURES)
    if note == "oracle_scaled":
        return FEATURES + ORACLE_FEATURES
    raise ValueError(f"unknown feature note {note!r}")


def categorised_name(name: str) -> str:
    """Column name of a feature after categorisation."""
    if name in STRING_FEATURES:
        return f"{name}_indexed"
    if name in UNBINNED_FEATURES:
        return name
    return f"{name}_binned"
