"""Source-list curation: keep accounts that are small enough, place
themselves somewhere real, and actually tweet about that place; re-admit
discarded accounts that are overwhelmingly about the two disaster topics;
then type each survivor into one of eight categories and score how often
it participates in disaster stories.
"""

from __future__ import annotations

import logging
import random
import zlib
from dataclasses import dataclass, replace
from functools import lru_cache
from math import ceil, log
from pathlib import Path
from typing import Mapping, Sequence

from .errors import EmptyAccount, NoDocuments, NoProfileLocation
from .geo import Gazetteer, geocode, tag_locations
from .records import (
    Headline,
    Post,
    SourceProfile,
    TopicAssignment,
    TRBC_CODES,
    TRBC_DESCENDANTS,
)
from .scope import Taxonomy, load_taxonomy
from .textvec import (
    CentroidSet,
    TfidfModel,
    build_centroids,
    centroid,
    fit_tfidf,
    nearest_centroid,
    tokenize,
    vectorize,
)

log_ = logging.getLogger(__name__)

_DATA_DIR = Path(__file__).resolve().parent / "data"

DEFAULT_FOLLOWER_CAP = 1_000_000
DEFAULT_LOCAL_FOCUS_THRESHOLD = 0.5
DEFAULT_SAMPLE_SIZE = 50
TARGET_TOPICS = frozenset({"Law/Crime", "Crisis/War/Disaster"})
TOPICAL_PERCENTILE = 0.80

# Media keywords that separate local news outlets from local authorities.
MEDIA_KEYWORDS = frozenset(
    {"news", "newsdesk", "newsroom", "headlines", "press", "coverage",
     "channel", "station", "tv", "television", "radio"}
)
PERSONAL_PRONOUNS = frozenset({"i", "me", "my", "myself"})

# Centroid codes that map straight to a category; the rest fall into the
# generic disaster/accident group and are split by profile heuristics.
DIRECT_CATEGORY = {
    "fires_explosions": "fire_emergency",
    "violence_crime": "police_traffic",
    "earthquakes_seismic": "quake_monitor",
    "severe_weather": "weather_monitor",
}


@lru_cache(maxsize=None)
def default_occupations() -> Taxonomy:
    return load_taxonomy(_DATA_DIR / "journalist_occupations.txt", "journalist_occupations")


def _stable_seed(seed: int, key: str) -> int:
    return seed ^ zlib.crc32(key.encode("utf-8"))


def filter_by_followers(
    profiles: Sequence[SourceProfile], cap: int = DEFAULT_FOLLOWER_CAP
) -> list[SourceProfile]:
    """Drop accounts above the follower cap (they are mature outlets, not
    early local reporters)."""
    if cap <= 0:
        raise ValueError("follower cap must be positive")
    return [p for p in profiles if p.followers <= cap]


def local_focus_ratio(
    profile: SourceProfile,
    sample: Sequence[Post],
    g: Gazetteer,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    seed: int = 0,
) -> float:
    """Share of located sample tweets that geocode inside the profile region.

    Tweets with no tagged location stay out of the denominator; an account
    with zero locatable tweets scores 0 (treated as not locally focused).
    """
    anchor_res = geocode(profile.profile_location, None, g)
    if not anchor_res.hit:
        raise NoProfileLocation(
            f"profile location {profile.profile_location!r} does not resolve"
        )
    posts = list(sample)
    if len(posts) > sample_size:
        rng = random.Random(_stable_seed(seed, profile.user_id))
        posts = rng.sample(posts, sample_size)
    hits = misses = 0
    for post in posts:
        tagged = tag_locations(post.text, g)
        if not tagged:
            continue
        res = geocode(tagged[0].query, profile.profile_location, g)
        if res.hit:
            hits += 1
        else:
            misses += 1
    total = hits + misses
    return hits / total if total else 0.0


def topical_focus(
    assignments: Sequence[TopicAssignment],
    target_topics: frozenset[str] = TARGET_TOPICS,
) -> set[str]:
    """Accounts whose tf.idf association with the target topics sits in the
    top 20 percentile.

    Accounts are terms, topics are documents: tf is the account's story
    count inside a topic, idf discounts accounts spread over many topics.
    An account qualifies when its best target-topic score reaches the 80th
    percentile (nearest rank) of all accounts' best scores.
    """
    if not assignments:
        raise NoDocuments("no topic assignments")
    topics = sorted({a.topic for a in assignments})
    n_topics = len(topics)
    df: dict[str, int] = {}
    per_topic: dict[str, dict[str, int]] = {t: {} for t in topics}
    for a in assignments:
        per_topic[a.topic][a.user_id] = per_topic[a.topic].get(a.user_id, 0) + a.count
    for topic_counts in per_topic.values():
        for user in topic_counts:
            df[user] = df.get(user, 0) + 1
    scores: dict[str, float] = {}
    for user, user_df in df.items():
        idf = log((1 + n_topics) / (1 + user_df)) + 1.0
        best = 0.0
        for topic in target_topics:
            tf = per_topic.get(topic, {}).get(user, 0)
            best = max(best, tf * idf)
        scores[user] = best
    ordered = sorted(scores.values())
    rank = max(0, ceil(TOPICAL_PERCENTILE * len(ordered)) - 1)
    threshold = ordered[rank]
    return {user for user, s in scores.items() if s >= threshold}


def build_trbc_centroids(
    headlines: Sequence[Headline],
    seed: int = 0,
    per_code_cap: int = 1000,
) -> tuple[TfidfModel, CentroidSet]:
    """Per-topic-code centroids over wire headlines.

    Each code is one tf.idf document built from up to per_code_cap sampled
    headlines; a code with listed descendants only samples headlines not
    also tagged by a descendant, so the parent code's sample stays disjoint.
    """
    by_code: dict[str, list[Headline]] = {code: [] for code in TRBC_CODES}
    for h in headlines:
        for code in h.topic_codes:
            if code not in by_code:
                continue
            descendants = TRBC_DESCENDANTS.get(code, frozenset())
            if descendants & h.topic_codes:
                continue
            by_code[code].append(h)
    sampled: dict[str, list[Headline]] = {}
    for code, items in by_code.items():
        if len(items) > per_code_cap:
            rng = random.Random(_stable_seed(seed, code))
            items = rng.sample(items, per_code_cap)
        if items:
            sampled[code] = items
    if not sampled:
        raise NoDocuments("no headlines carry known topic codes")
    documents = []
    for code in sorted(sampled):
        doc_tokens: list[str] = []
        for h in sampled[code]:
            doc_tokens.extend(tokenize(h.text))
        documents.append((code, doc_tokens))
    tfidf = fit_tfidf(documents)
    groups = []
    for code in sorted(sampled):
        vectors = [vectorize(tokenize(h.text), tfidf) for h in sampled[code]]
        groups.append((code, vectors))
    return tfidf, build_centroids(groups)


def classify_account(
    profile: SourceProfile,
    sample_tweets: Sequence[Post],
    trbc_centroids: CentroidSet,
    tfidf: TfidfModel,
    seed: int = 0,
    max_tweets: int = 1000,
    occupations: Taxonomy | None = None,
) -> str:
    """Type an account by its nearest topic-code centroid.

    Fire, police, quake, and weather codes map directly. The generic
    disaster/accident group splits on: journalist wording in the profile
    description, then local focus (non-local means a global monitor), then
    media keywords (news outlet), else local authority.
    """
    if not sample_tweets:
        raise EmptyAccount(f"account {profile.user_id!r} has no tweets to sample")
    tweets = list(sample_tweets)
    if len(tweets) > max_tweets:
        rng = random.Random(_stable_seed(seed, profile.user_id))
        tweets = rng.sample(tweets, max_tweets)
    vectors = [vectorize(tokenize(t.text), tfidf) for t in tweets]
    acct = centroid(vectors)
    code, _sim = nearest_centroid(acct, trbc_centroids)
    direct = DIRECT_CATEGORY.get(code)
    if direct is not None:
        return direct
    description_tokens = set(tokenize(profile.description))
    occupations = occupations or default_occupations()
    occupation_words = {t for phrase in occupations.terms for t in phrase.split()}
    if description_tokens & (PERSONAL_PRONOUNS | occupation_words):
        return "local_journalist"
    if not profile.locally_focused:
        return "disaster_monitor"
    name_desc_tokens = description_tokens | set(tokenize(profile.display_name))
    if name_desc_tokens & MEDIA_KEYWORDS:
        return "local_news"
    return "local_authority"


def informativeness(history: Sequence[Post], story_memberships: int) -> float:
    """Disaster/accident stories per 100 tweets."""
    if not history:
        raise EmptyAccount("informativeness over an empty history")
    return 100.0 * story_memberships / len(history)


@dataclass(frozen=True)
class CurationConfig:
    seed: int = 0
    follower_cap: int = DEFAULT_FOLLOWER_CAP
    local_focus_threshold: float = DEFAULT_LOCAL_FOCUS_THRESHOLD
    sample_size: int = DEFAULT_SAMPLE_SIZE
    target_topics: frozenset[str] = TARGET_TOPICS


def curate(
    profiles: Sequence[SourceProfile],
    tweets_by_user: Mapping[str, Sequence[Post]],
    assignments: Sequence[TopicAssignment],
    g: Gazetteer,
    trbc_centroids: CentroidSet,
    tfidf: TfidfModel,
    config: CurationConfig | None = None,
) -> tuple[list[SourceProfile], dict[str, int]]:
    """Run the full curation pipeline; returns (curated, stage counters).

    Profiles removed at any stage remain candidates for topical re-admission.
    Per-profile failures (no tweets, unresolvable data) skip the profile
    with a log line rather than aborting the run.
    """
    cfg = config or CurationConfig()
    stages = {
        "input": len(profiles),
        "removed_follower_cap": 0,
        "removed_no_location": 0,
        "removed_not_local": 0,
        "readmitted_topical": 0,
        "skipped_errors": 0,
        "curated": 0,
    }
    removed: list[SourceProfile] = []
    survivors: list[SourceProfile] = []

    step1 = []
    for p in profiles:
        if p.followers > cfg.follower_cap:
            stages["removed_follower_cap"] += 1
            removed.append(p)
        else:
            step1.append(p)

    step2 = []
    for p in step1:
        res = geocode(p.profile_location, None, g) if p.profile_location else None
        if res is None or not res.hit:
            stages["removed_no_location"] += 1
            removed.append(p)
        else:
            step2.append(replace(p, resolved_location=res.entry))

    for p in step2:
        try:
            ratio = local_focus_ratio(
                p, tweets_by_user.get(p.user_id, ()), g, cfg.sample_size, cfg.seed
            )
        except NoProfileLocation:
            stages["removed_no_location"] += 1
            removed.append(p)
            continue
        if ratio >= cfg.local_focus_threshold:
            survivors.append(replace(p, locally_focused=True))
        else:
            stages["removed_not_local"] += 1
            removed.append(p)

    if assignments:
        qualified = topical_focus(assignments, cfg.target_topics)
        for p in removed:
            if p.user_id in qualified:
                stages["readmitted_topical"] += 1
                survivors.append(replace(p, locally_focused=False))

    story_counts: dict[str, int] = {}
    for a in assignments:
        story_counts[a.user_id] = story_counts.get(a.user_id, 0) + a.count

    curated = []
    for p in survivors:
        history = tweets_by_user.get(p.user_id, ())
        try:
            category = classify_account(
                p, history, trbc_centroids, tfidf, seed=cfg.seed
            )
            info = informativeness(history, story_counts.get(p.user_id, 0))
        except EmptyAccount as exc:
            stages["skipped_errors"] += 1
            log_.warning("skipping %s: %s", p.user_id, exc)
            continue
        curated.append(replace(p, category=category, informativeness=info))

    curated.sort(key=lambda p: p.user_id)
    stages["curated"] = len(curated)
    return curated, stages
