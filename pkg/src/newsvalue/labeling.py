"""Noisy distant labeling against global wire headlines.

A report is "globally reported" when some headline published in the 24
hours after it clears the cosine threshold. Taxonomy and pattern spans are
masked with their feature names on both sides first, so the label never
leaks raw taxonomy tokens into the features. Reports matching only earlier
headlines are tardy (the story had already broken) and stay unmatched.
One propagation pass then links near-duplicate unmatched reports to
matched ones, and undersampling trims the negatives to a fixed ratio.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Callable, Optional, Sequence

from .errors import DegenerateLabels
from .impact import default_address_terms, default_human_impact_terms, default_site_terms
from .records import Headline, LabeledExample, Post
from .scope import (
    Taxonomy,
    default_fire_causes,
    default_scale_lexicon,
    scope_pattern_spans,
    taxonomy_spans,
)
from .spans import select_spans
from .textvec import SparseVector, TfidfModel, cosine, fit_tfidf, tokenize, vectorize

MATCH_WINDOW_SECONDS = 86400

MATCHED = "matched"
UNMATCHED = "unmatched"
TARDY = "tardy"


@dataclass(frozen=True)
class MaskRule:
    """A feature name plus a finder producing (start, end) spans to mask."""

    feature_name: str
    find: Callable[[str], list[tuple[int, int]]]


def _taxonomy_rule(name: str, tax: Taxonomy) -> MaskRule:
    return MaskRule(name, lambda text, _t=tax: [(s, e) for s, e, _ in taxonomy_spans(text, _t)])


def default_mask_rules(
    scale_lexicon: Taxonomy | None = None,
    fire_causes: Taxonomy | None = None,
    human_tax: Taxonomy | None = None,
    addr_tax: Taxonomy | None = None,
    site_tax: Taxonomy | None = None,
) -> tuple[MaskRule, ...]:
    """Scope patterns plus every shipped taxonomy, each under its feature name."""

    def patterns(text: str, feature: str) -> list[tuple[int, int]]:
        return [(s, e) for s, e, name in scope_pattern_spans(text) if name == feature]

    pattern_names = (
        "scope_alarm_level",
        "scope_quake_magnitude",
        "scope_wildfire_size",
        "scope_vehicle_count",
        "scope_weather_scale",
        "scope_hail_size",
    )
    rules = [
        MaskRule(name, lambda text, _n=name: patterns(text, _n)) for name in pattern_names
    ]
    rules.append(_taxonomy_rule("scope_scale_adj", scale_lexicon or default_scale_lexicon()))
    rules.append(_taxonomy_rule("scope_fire_cause", fire_causes or default_fire_causes()))
    rules.append(_taxonomy_rule("impact_human_term", human_tax or default_human_impact_terms()))
    rules.append(_taxonomy_rule("impact_address_term", addr_tax or default_address_terms()))
    rules.append(_taxonomy_rule("impact_site_term", site_tax or default_site_terms()))
    return tuple(rules)


def mask_spans(text: str, rules: Sequence[MaskRule]) -> list[tuple[int, int, str]]:
    """Spans each rule claims, resolved longest-match then leftmost."""
    cands: list[tuple[int, int, str]] = []
    for rule in rules:
        cands.extend((s, e, rule.feature_name) for s, e in rule.find(text))
    return select_spans(cands)


def mask_taxonomy_tokens(text: str, rules: Sequence[MaskRule]) -> str:
    """Replace every claimed span with its feature-name token."""
    out = text
    for start, end, name in reversed(mask_spans(text, rules)):
        out = out[:start] + name + out[end:]
    return out


@dataclass(frozen=True)
class MatchResult:
    """Labeling outcome for one post."""

    post_id: str
    status: str  # matched | unmatched | tardy
    best_headline: Optional[int] = None
    best_score: float = 0.0
    via_link: bool = False


def match_to_headlines(
    post: Post,
    headlines: Sequence[Headline],
    tfidf: TfidfModel,
    threshold: float = 0.5,
    headline_vectors: Sequence[SparseVector] | None = None,
) -> MatchResult:
    """Match one (already masked) post against (already masked) headlines.

    Matched: a headline published in (t, t+86400] clears the threshold.
    Tardy: only headlines at or before t clear it. Otherwise unmatched.
    best_score is the best in-window score (the best earlier score for
    tardy posts).
    """
    if headline_vectors is None:
        headline_vectors = [vectorize(tokenize(h.text), tfidf) for h in headlines]
    v = vectorize(tokenize(post.text), tfidf)
    best_after = (0.0, None)
    best_before = (0.0, None)
    window_end = post.created_at + MATCH_WINDOW_SECONDS
    for idx, h in enumerate(headlines):
        score = cosine(v, headline_vectors[idx])
        if post.created_at < h.published_at <= window_end:
            if score > best_after[0]:
                best_after = (score, idx)
        elif h.published_at <= post.created_at:
            if score > best_before[0]:
                best_before = (score, idx)
    if best_after[0] >= threshold:
        return MatchResult(post.post_id, MATCHED, best_after[1], best_after[0])
    if best_before[0] >= threshold:
        return MatchResult(post.post_id, TARDY, best_before[1], best_before[0])
    return MatchResult(post.post_id, UNMATCHED, best_after[1], best_after[0])


def _utc_date(ts: int):
    return datetime.fromtimestamp(ts, tz=timezone.utc).date()


def propagate_links(
    results: Sequence[MatchResult],
    posts: Sequence[Post],
    tfidf: TfidfModel,
    link_threshold: float = 0.5,
    same_user_threshold: float = 0.3,
) -> list[MatchResult]:
    """One linking pass from the frozen first-pass matched set.

    An unmatched (or tardy) post joins the matched set when it is similar
    enough to a first-pass matched post from strictly later the same UTC
    day; the threshold drops for matched posts by the same author. Never
    unmatches anything; runs exactly once to avoid long-tail error chains.
    """
    by_id = {p.post_id: p for p in posts}
    vectors = {p.post_id: vectorize(tokenize(p.text), tfidf) for p in posts}
    matched = [r for r in results if r.status == MATCHED]
    out = []
    for r in results:
        if r.status == MATCHED:
            out.append(r)
            continue
        post = by_id.get(r.post_id)
        if post is None:
            out.append(r)
            continue
        best_link = 0.0
        for m in matched:
            other = by_id.get(m.post_id)
            if other is None or other.created_at <= post.created_at:
                continue
            if _utc_date(other.created_at) != _utc_date(post.created_at):
                continue
            threshold = (
                same_user_threshold if other.user_id == post.user_id else link_threshold
            )
            score = cosine(vectors[post.post_id], vectors[other.post_id])
            if score >= threshold and score > best_link:
                best_link = score
        if best_link > 0.0:
            out.append(
                replace(
                    r,
                    status=MATCHED,
                    via_link=True,
                    best_score=max(r.best_score, best_link),
                )
            )
        else:
            out.append(r)
    return out


def undersample(
    examples: Sequence[LabeledExample], ratio: int = 10, seed: int = 0
) -> list[LabeledExample]:
    """Keep every matched example; sample the unmatched down to ratio x matched."""
    matched_idx = [i for i, e in enumerate(examples) if e.label]
    unmatched_idx = [i for i, e in enumerate(examples) if not e.label]
    if not matched_idx:
        raise DegenerateLabels("undersample needs at least one matched example")
    cap = ratio * len(matched_idx)
    if len(unmatched_idx) > cap:
        rng = random.Random(seed)
        unmatched_idx = sorted(rng.sample(unmatched_idx, cap))
    keep = sorted(matched_idx + unmatched_idx)
    return [examples[i] for i in keep]


@dataclass
class LabelingRun:
    """Everything one labeling pass produced, plus its counters."""

    results: list[MatchResult]
    masked_posts: list[Post]
    masked_headlines: list[Headline]
    tfidf: TfidfModel
    stats: dict[str, int]


def label_corpus(
    posts: Sequence[Post],
    headlines: Sequence[Headline],
    rules: Sequence[MaskRule] | None = None,
    threshold: float = 0.5,
    link_threshold: float = 0.5,
    same_user_threshold: float = 0.3,
) -> LabelingRun:
    """Mask both sides, fit one shared tf.idf vocabulary, match, propagate."""
    if rules is None:
        rules = default_mask_rules()
    masked_posts = [replace(p, text=mask_taxonomy_tokens(p.text, rules)) for p in posts]
    masked_headlines = [
        replace(h, text=mask_taxonomy_tokens(h.text, rules)) for h in headlines
    ]
    documents = [(f"post:{p.post_id}", tokenize(p.text)) for p in masked_posts]
    documents += [(f"headline:{i}", tokenize(h.text)) for i, h in enumerate(masked_headlines)]
    tfidf = fit_tfidf(documents)
    headline_vectors = [vectorize(tokenize(h.text), tfidf) for h in masked_headlines]
    first_pass = [
        match_to_headlines(p, masked_headlines, tfidf, threshold, headline_vectors)
        for p in masked_posts
    ]
    final = propagate_links(
        first_pass, masked_posts, tfidf, link_threshold, same_user_threshold
    )
    stats = {
        "posts": len(posts),
        "matched_direct": sum(1 for r in first_pass if r.status == MATCHED),
        "matched": sum(1 for r in final if r.status == MATCHED),
        "tardy": sum(1 for r in final if r.status == TARDY),
        "unmatched": sum(1 for r in final if r.status == UNMATCHED),
    }
    stats["via_link"] = stats["matched"] - stats["matched_direct"]
    return LabelingRun(
        results=final,
        masked_posts=masked_posts,
        masked_headlines=masked_headlines,
        tfidf=tfidf,
        stats=stats,
    )
