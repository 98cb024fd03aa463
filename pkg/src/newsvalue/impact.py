"""Numeric-phrase extraction and impact typing.

Finds every number in a report (digits, words, soft quantities), attaches
its surrounding noun-phrase context with a lightweight chunker, and
classifies each phrase as date/time, address, human impact, or financial
impact with a linear one-vs-rest classifier over eight cheap features.
Also detects physical-site nouns.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import ceil
from pathlib import Path
from typing import Optional, Sequence

from .errors import NoDocuments
from .linear import LinearModel, SGDConfig, train_one_vs_rest
from .records import Post
from .scope import Taxonomy, load_taxonomy, match_phrases
from .spans import select_spans
from .textvec import SparseVector, TfidfModel, fit_tfidf, token_spans, tokenize, vectorize

_DATA_DIR = Path(__file__).resolve().parent / "data"

IMPACT_CLASSES = ("date_time", "address", "human_impact", "financial_impact")

SOFT_QUANTITIES = {
    "several": 3.0,
    "scores": 20.0,
    "dozens": 24.0,
    "hundreds": 100.0,
    "thousands": 1000.0,
    "lakh": 100000.0,
    "crore": 10000000.0,
}

_UNITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
}
_TENS = {
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50,
    "sixty": 60, "seventy": 70, "eighty": 80, "ninety": 90,
}
_SCALES = {
    "dozen": 12, "hundred": 100, "thousand": 1000,
    "million": 1_000_000, "billion": 1_000_000_000,
    "lakh": 100_000, "crore": 10_000_000,
}
_NUMBER_WORDS = frozenset(_UNITS) | frozenset(_TENS) | frozenset(_SCALES) | {"and", "a", "an"}

# Joined digit runs ("06:02", "5/20", "07-11") keep their separators so
# timestamp features can see them; plain numerals allow comma grouping.
_JOINED_RUN_RE = re.compile(r"\d+(?:[:/\-]\d+)+")
_DIGIT_RE = re.compile(
    r"(\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?)"
    r"(?:\s*(hundred|thousand|million|billion|lakh|crore)s?\b|(k|mm?|bn?)\b)?",
    re.IGNORECASE,
)
_SOFT_RE = re.compile(
    r"\b(several|scores\s+of|dozens\s+of|hundreds(?:\s+of\s+thousands)?|thousands|lakhs?|crores?)\b",
    re.IGNORECASE,
)
_WORD_RUN_RE = re.compile(
    r"\b(?:" + "|".join(sorted(_NUMBER_WORDS - {"and", "a", "an"})) + r")\b",
    re.IGNORECASE,
)

_SUFFIX_SCALE = {"k": 1e3, "m": 1e6, "mm": 1e6, "b": 1e9, "bn": 1e9}

# Tokens that terminate the noun-phrase chunk around a numeral.
_FUNCTION_WORDS = frozenset(
    """a an the this that these those and or but nor so yet of in on at to for
    from by with about into over under after before between during against
    near off is are was were be been being has have had do does did will
    would can could may might shall should must not no as than then when
    while where which who whom whose it its he she they them his her their
    we our you your i me my""".split()
)


@dataclass(frozen=True)
class NumericPhrase:
    """One numeric expression with its span and noun-phrase context."""

    span: tuple[int, int]
    raw: str
    value: Optional[float] = None
    soft_quantity: Optional[str] = None
    context_tokens: tuple[str, ...] = ()

    def __post_init__(self):
        if self.value is None and self.soft_quantity is None:
            raise ValueError("numeric phrase needs a value or a soft quantity")
        if self.span[1] <= self.span[0]:
            raise ValueError("empty span")


@dataclass(frozen=True)
class ImpactFeatureRow:
    """The eight classifier features for one numeric phrase."""

    mixed_alnum: bool = False
    currency_symbol: bool = False
    monetary_suffix: bool = False
    timestamp_symbol: bool = False
    timezone_or_period: bool = False
    human_terms_hits: int = 0
    address_terms_hits: int = 0
    tfidf_triple: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def as_features(self) -> list[tuple[str, float]]:
        return [
            ("mixed_alnum", 1.0 if self.mixed_alnum else 0.0),
            ("currency_symbol", 1.0 if self.currency_symbol else 0.0),
            ("monetary_suffix", 1.0 if self.monetary_suffix else 0.0),
            ("timestamp_symbol", 1.0 if self.timestamp_symbol else 0.0),
            ("timezone_or_period", 1.0 if self.timezone_or_period else 0.0),
            ("human_terms_hits", float(self.human_terms_hits)),
            ("address_terms_hits", float(self.address_terms_hits)),
            ("tfidf_address", self.tfidf_triple[0]),
            ("tfidf_human", self.tfidf_triple[1]),
            ("tfidf_financial", self.tfidf_triple[2]),
        ]


@lru_cache(maxsize=None)
def default_human_impact_terms() -> Taxonomy:
    return load_taxonomy(_DATA_DIR / "human_impact_terms.txt", "human_impact_terms")


@lru_cache(maxsize=None)
def default_address_terms() -> Taxonomy:
    return load_taxonomy(_DATA_DIR / "address_terms.txt", "address_terms")


@lru_cache(maxsize=None)
def default_site_terms() -> Taxonomy:
    return load_taxonomy(_DATA_DIR / "site_terms.txt", "site_terms")


def parse_word_number(words: Sequence[str]) -> Optional[float]:
    """Value of an English number-word run ('four thousand two hundred six').

    Returns None when the run carries no number words at all.
    """
    total = 0.0
    current = 0.0
    seen = False
    for raw in words:
        w = raw.lower()
        if w in ("and",):
            continue
        if w in ("a", "an"):
            if current == 0.0:
                current = 1.0
            continue
        if w in _UNITS:
            current += _UNITS[w]
            seen = True
        elif w in _TENS:
            current += _TENS[w]
            seen = True
        elif w in _SCALES:
            current = (current if current else 1.0) * _SCALES[w]
            if _SCALES[w] >= 1000:
                total += current
                current = 0.0
            seen = True
        else:
            return None
    return total + current if seen else None


def _word_number_runs(text: str) -> list[tuple[int, int, float]]:
    """Maximal runs of adjacent number words, parsed to values."""
    matches = list(_WORD_RUN_RE.finditer(text))
    runs: list[tuple[int, int, float]] = []
    i = 0
    while i < len(matches):
        j = i
        # Extend while separated only by spaces, hyphens, or "and"/"a".
        while j + 1 < len(matches):
            gap = text[matches[j].end() : matches[j + 1].start()]
            if re.fullmatch(r"[\s\-]+(?:and[\s\-]+)?|[\s\-]*", gap) and len(gap) <= 8:
                j += 1
            else:
                break
        start, end = matches[i].start(), matches[j].end()
        # Include a leading "a"/"an" for "a dozen" style phrases.
        lead = re.search(r"\b(an?)[\s\-]+$", text[:start], re.IGNORECASE)
        words = re.findall(r"[^\W\d]+", text[start:end].lower())
        if lead and words and words[0] in _SCALES:
            start = lead.start(1)
            words.insert(0, lead.group(1).lower())
        value = parse_word_number(words)
        if value is not None:
            runs.append((start, end, value))
        i = j + 1
    return runs


_QUANTITY_STOPS = frozenset(
    "thousands hundreds dozens scores millions billions lakhs crores several".split()
)


def _chunk_stop(tok: str) -> bool:
    return (
        tok in _FUNCTION_WORDS
        or tok in _NUMBER_WORDS
        or tok in _QUANTITY_STOPS
        or tok[0].isdigit()
    )


def _context_tokens(text: str, span: tuple[int, int]) -> tuple[str, ...]:
    """Noun-phrase-ish tokens around the numeral: contiguous non-function
    words (whitespace/hyphen gaps only), up to 2 left and 3 right,
    numerals and quantity words excluded."""
    toks = token_spans(text)
    left = [(t, s, e) for t, s, e in toks if e <= span[0]]
    right = [(t, s, e) for t, s, e in toks if s >= span[1]]
    picked_left: list[str] = []
    boundary = span[0]
    for tok, start, end in reversed(left):
        gap = text[end:boundary]
        if gap.strip(" -") or _chunk_stop(tok) or len(picked_left) >= 2:
            break
        picked_left.append(tok)
        boundary = start
    out = list(reversed(picked_left))
    picked_right = 0
    boundary = span[1]
    for tok, start, end in right:
        gap = text[boundary:start]
        if gap.strip(" -") or _chunk_stop(tok) or picked_right >= 3:
            break
        out.append(tok)
        picked_right += 1
        boundary = end
    return tuple(out)


def extract_numeric_phrases(text: str) -> list[NumericPhrase]:
    """All numeric expressions in the text, spans non-overlapping.

    Digits (with comma grouping, decimals, scale suffixes), joined
    timestamp-like runs, English number words, and soft quantities with
    magnitude floors.
    """
    cands: list[tuple[int, int, tuple[Optional[float], Optional[str]]]] = []
    for m in _JOINED_RUN_RE.finditer(text):
        lead = float(m.group(0).split(":")[0].split("/")[0].split("-")[0])
        cands.append((m.start(), m.end(), (lead, None)))
    for m in _DIGIT_RE.finditer(text):
        value = float(m.group(1).replace(",", ""))
        if m.group(2):
            value *= _SCALES[m.group(2).lower()]
        elif m.group(3):
            value *= _SUFFIX_SCALE[m.group(3).lower()]
        cands.append((m.start(), m.end(), (value, None)))
    for m in _SOFT_RE.finditer(text):
        phrase = " ".join(m.group(1).lower().split())
        if phrase == "hundreds of thousands":
            key, floor = "thousands", 100000.0
        else:
            key = {
                "several": "several", "scores of": "scores", "dozens of": "dozens",
                "hundreds": "hundreds", "thousands": "thousands",
                "lakh": "lakh", "lakhs": "lakh", "crore": "crore", "crores": "crore",
            }[phrase]
            floor = SOFT_QUANTITIES[key]
        cands.append((m.start(), m.end(), (floor, key)))
    for start, end, value in _word_number_runs(text):
        cands.append((start, end, (value, None)))
    selected = select_spans(cands)
    out = []
    for start, end, (value, soft) in selected:
        out.append(
            NumericPhrase(
                span=(start, end),
                raw=text[start:end],
                value=value,
                soft_quantity=soft,
                context_tokens=_context_tokens(text, (start, end)),
            )
        )
    return out


# ---------------------------------------------------------------------------
# feature extraction
# ---------------------------------------------------------------------------

_CURRENCY_CHARS = "$€£¥₹₩₽"
_TZ_PERIOD = frozenset(
    "am pm utc gmt est edt cst cdt mst mdt pst pdt bst ist cet cest jst aest".split()
)
_MIXED_RE = re.compile(r"[^\W\d_]\d|\d[^\W\d_]")
_TS_RE = re.compile(r"\d[:\-/]\d")
_ATTACHED_SUFFIX_RE = re.compile(r"\d\s?(k|mm?|bn?)\b", re.IGNORECASE)


@dataclass(frozen=True)
class CategoryTfidf:
    """Per-category tf.idf vectors; one document per non-date category."""

    model: TfidfModel
    vectors: dict[str, SparseVector]


def fit_category_tfidf(docs: dict[str, Sequence[str]]) -> CategoryTfidf:
    """Each category's token list is one document."""
    if not docs:
        raise NoDocuments("no category documents")
    model = fit_tfidf(sorted(docs.items()))
    vectors = {label: vectorize(tokens, model) for label, tokens in docs.items()}
    return CategoryTfidf(model=model, vectors=vectors)


@lru_cache(maxsize=None)
def default_category_tfidf() -> CategoryTfidf:
    """Category documents seeded from the shipped taxonomies plus common
    co-occurring vocabulary for each category."""
    address = sorted(t for p in default_address_terms().terms for t in p.split())
    human = sorted(t for p in default_human_impact_terms().terms for t in p.split())
    financial = (
        "damages losses loss cost costs worth estimated million billion dollars "
        "euros insurance economic business property damage payout fund funds"
    ).split()
    return fit_category_tfidf(
        {
            "address": address + "street address corner near downtown".split(),
            "human_impact": human + "people persons residents children toll".split(),
            "financial_impact": financial,
        }
    )


def impact_features(
    p: NumericPhrase,
    text: str,
    human_tax: Taxonomy | None = None,
    addr_tax: Taxonomy | None = None,
    cat_tfidf: CategoryTfidf | None = None,
) -> ImpactFeatureRow:
    """Compute the eight classifier features for one phrase in its tweet."""
    human_tax = human_tax or default_human_impact_terms()
    addr_tax = addr_tax or default_address_terms()
    cat_tfidf = cat_tfidf or default_category_tfidf()

    start, end = p.span
    raw = p.raw
    before = text[max(0, start - 2) : start]
    after = text[end : end + 2]

    window_tokens = tokenize(text[max(0, start - 12) : min(len(text), end + 12)])
    near = set(window_tokens)

    tweet_tokens = tokenize(text)
    triple = []
    for label in ("address", "human_impact", "financial_impact"):
        vec = cat_tfidf.vectors.get(label)
        best = 0.0
        if vec is not None:
            for tok in tweet_tokens:
                w = vec.entries.get(tok, 0.0)
                if w > best:
                    best = w
        triple.append(best)

    context = list(p.context_tokens)
    return ImpactFeatureRow(
        mixed_alnum=bool(_MIXED_RE.search(raw)),
        currency_symbol=any(c in _CURRENCY_CHARS for c in before + after + raw),
        monetary_suffix=bool(_ATTACHED_SUFFIX_RE.search(raw)),
        timestamp_symbol=bool(_TS_RE.search(raw)),
        timezone_or_period=bool(near & _TZ_PERIOD),
        human_terms_hits=len(match_phrases(context, human_tax)),
        address_terms_hits=len(match_phrases(context, addr_tax)),
        tfidf_triple=(triple[0], triple[1], triple[2]),
    )


# ---------------------------------------------------------------------------
# classifier
# ---------------------------------------------------------------------------

def train_impact_classifier(
    rows: Sequence[tuple[ImpactFeatureRow, str]],
    config: SGDConfig | None = None,
) -> LinearModel:
    """One-vs-rest hinge SGD over the eight features; deterministic per seed."""
    from .errors import DegenerateLabels

    labels = {label for _, label in rows}
    if len(labels) < 2:
        raise DegenerateLabels("impact training needs at least two classes")
    unknown = labels - set(IMPACT_CLASSES)
    if unknown:
        raise ValueError(f"unknown impact labels: {sorted(unknown)}")
    cfg = config or SGDConfig(epochs=50, learning_rate=0.01, l2=1e-4, seed=0)
    prepared = [(row.as_features(), label) for row, label in rows]
    model = train_one_vs_rest(prepared, IMPACT_CLASSES, cfg, kind="impact")
    model.train_meta["train_report"] = classification_report(model, rows)
    return model


def classify_impact(
    p: NumericPhrase,
    model: LinearModel,
    text: str = "",
    human_tax: Taxonomy | None = None,
    addr_tax: Taxonomy | None = None,
    cat_tfidf: CategoryTfidf | None = None,
) -> str:
    """Argmax class for one phrase; ties break by the fixed class order."""
    row = impact_features(p, text or p.raw, human_tax, addr_tax, cat_tfidf)
    return model.predict(dict(row.as_features()))


def classification_report(
    model: LinearModel, rows: Sequence[tuple[ImpactFeatureRow, str]]
) -> dict[str, dict[str, float]]:
    """Per-class precision/recall/F1 plus macro and micro averages."""
    tp: Counter[str] = Counter()
    fp: Counter[str] = Counter()
    fn: Counter[str] = Counter()
    for row, label in rows:
        pred = model.predict(dict(row.as_features()))
        if pred == label:
            tp[label] += 1
        else:
            fp[pred] += 1
            fn[label] += 1
    report: dict[str, dict[str, float]] = {}
    f1s = []
    for cls in IMPACT_CLASSES:
        p = tp[cls] / (tp[cls] + fp[cls]) if tp[cls] + fp[cls] else 0.0
        r = tp[cls] / (tp[cls] + fn[cls]) if tp[cls] + fn[cls] else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        report[cls] = {"precision": p, "recall": r, "f1": f}
        f1s.append(f)
    total = sum(tp.values()) + sum(fn.values())
    micro = sum(tp.values()) / total if total else 0.0
    report["macro"] = {"f1": sum(f1s) / len(f1s)}
    report["micro"] = {"f1": micro}
    return report


# ---------------------------------------------------------------------------
# site terms and taxonomy bootstrapping
# ---------------------------------------------------------------------------

def extract_site_terms(
    tokens: Sequence[str], site_tax: Taxonomy | None = None
) -> list[str]:
    """Physical-site nouns in token order."""
    return match_phrases(tokens, site_tax or default_site_terms())


def build_human_impact_taxonomy(corpus: Sequence[Post]) -> list[tuple[str, int]]:
    """Frequency-ranked candidate tokens for the human-impact taxonomy.

    Runs the numeric-phrase extractor over the corpus, strips numerals from
    the contexts, and keeps the top five percentiles of distinct tokens by
    frequency. The returned ranking is reviewed by hand and then shipped as
    a taxonomy file; this function only proposes candidates.
    """
    if not corpus:
        raise NoDocuments("empty corpus")
    counts: Counter[str] = Counter()
    for post in corpus:
        for phrase in extract_numeric_phrases(post.text):
            for tok in phrase.context_tokens:
                if not tok[0].isdigit():
                    counts[tok] += 1
    if not counts:
        return []
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = max(1, ceil(len(ranked) * 0.05))
    return ranked[:keep]


# ---------------------------------------------------------------------------
# labeled phrase files
# ---------------------------------------------------------------------------

def save_labeled_phrases(
    path, rows: Sequence[tuple[str, tuple[int, int], str]]
) -> int:
    """Write one tab-delimited row per phrase: text (JSON-escaped), start,
    end, label."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for text, (start, end), label in rows:
            fh.write(f"{json.dumps(text)}\t{start}\t{end}\t{label}\n")
            n += 1
    return n


def load_labeled_phrases(path) -> list[tuple[str, tuple[int, int], str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"labeled phrases line {lineno}: expected 4 columns")
            text, start, end, label = parts
            if label not in IMPACT_CLASSES:
                raise ValueError(f"labeled phrases line {lineno}: bad label {label!r}")
            out.append((json.loads(text), (int(start), int(end)), label))
    return out


def rows_from_labeled_phrases(
    records: Sequence[tuple[str, tuple[int, int], str]],
    human_tax: Taxonomy | None = None,
    addr_tax: Taxonomy | None = None,
    cat_tfidf: CategoryTfidf | None = None,
) -> list[tuple[ImpactFeatureRow, str]]:
    """Feature rows for training from (text, span, label) records; the
    phrase is re-extracted at the stored span."""
    rows = []
    for text, span, label in records:
        matching = [p for p in extract_numeric_phrases(text) if p.span == tuple(span)]
        phrase = matching[0] if matching else NumericPhrase(
            span=tuple(span), raw=text[span[0] : span[1]], value=0.0,
            context_tokens=_context_tokens(text, tuple(span)),
        )
        rows.append((impact_features(phrase, text, human_tax, addr_tax, cat_tfidf), label))
    return rows


# ---------------------------------------------------------------------------
# bootstrap model for pipelines without hand-labeled phrases
# ---------------------------------------------------------------------------

def _canonical_rows() -> list[tuple[ImpactFeatureRow, str]]:
    rows: list[tuple[ImpactFeatureRow, str]] = []
    for tz in (False, True):
        rows.append((ImpactFeatureRow(timestamp_symbol=True, timezone_or_period=tz), "date_time"))
        rows.append((ImpactFeatureRow(timestamp_symbol=True, timezone_or_period=tz, mixed_alnum=True), "date_time"))
    rows.append((ImpactFeatureRow(timezone_or_period=True), "date_time"))
    rows.append((ImpactFeatureRow(), "date_time"))
    for hits in (1, 2):
        for t in (0.6, 1.4):
            rows.append(
                (ImpactFeatureRow(address_terms_hits=hits, mixed_alnum=True,
                                  tfidf_triple=(t, 0.0, 0.0)), "address")
            )
            rows.append(
                (ImpactFeatureRow(address_terms_hits=hits, tfidf_triple=(t, 0.0, 0.0)), "address")
            )
            rows.append(
                (ImpactFeatureRow(human_terms_hits=hits, tfidf_triple=(0.0, t, 0.0)), "human_impact")
            )
            rows.append(
                (ImpactFeatureRow(human_terms_hits=hits + 1, tfidf_triple=(0.0, t, 0.0)), "human_impact")
            )
    rows.append((ImpactFeatureRow(human_terms_hits=1), "human_impact"))
    rows.append((ImpactFeatureRow(human_terms_hits=3, tfidf_triple=(0.0, 2.0, 0.0)), "human_impact"))
    rows.append((ImpactFeatureRow(address_terms_hits=1), "address"))
    for cur in (True, False):
        for mon in (True, False):
            if not cur and not mon:
                continue
            for t in (0.0, 0.8, 1.6):
                rows.append(
                    (ImpactFeatureRow(currency_symbol=cur, monetary_suffix=mon,
                                      mixed_alnum=mon, tfidf_triple=(0.0, 0.0, t)),
                     "financial_impact")
                )
    rows.append((ImpactFeatureRow(tfidf_triple=(0.0, 0.0, 1.2), monetary_suffix=True,
                                  mixed_alnum=True), "financial_impact"))
    rows.append((ImpactFeatureRow(currency_symbol=True, human_terms_hits=1,
                                  tfidf_triple=(0.0, 0.3, 1.0)), "financial_impact"))
    return rows


def bootstrap_impact_model(seed: int = 0) -> LinearModel:
    """Train the default impact model from built-in canonical rows."""
    cfg = SGDConfig(epochs=50, learning_rate=0.01, l2=1e-4, seed=seed)
    return train_impact_classifier(_canonical_rows(), cfg)
