"""Scope indicators: taxonomy lookups and pattern parsers that quantify how
big a reported incident is (scale adjectives, alarm levels, fire causes,
quake magnitudes, wildfire sizes, vehicle counts, weather scales, hail).

All extractors are pure functions of the raw text. When a text carries
several candidates for the same indicator, the largest value wins: these
features measure severity ceilings.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .spans import phrase_spans, select_spans
from .textvec import tokenize

_DATA_DIR = Path(__file__).resolve().parent / "data"

# Bounds for parsed values; out-of-range candidates are ignored.
MAX_ALARM_LEVEL = 20
MAX_QUAKE_MAGNITUDE = 12.0
MAX_EF_LEVEL = 5
MAX_TORRO_LEVEL = 11
MAX_BEAUFORT_LEVEL = 12

ACRES_PER_UNIT = {
    "acre": 1.0,
    "sq_mi": 640.0,
    "sq_km": 247.105,
}


class Taxonomy:
    """Named set of lowercase phrases, each 1-4 tokens long."""

    def __init__(self, name: str, terms: Iterable[str]):
        phrases = {}
        for term in terms:
            toks = tuple(tokenize(term))
            if not toks or len(toks) > 4:
                raise ValueError(f"taxonomy {name!r}: bad phrase {term!r}")
            phrases[toks] = " ".join(toks)
        if not phrases:
            raise ValueError(f"taxonomy {name!r} is empty")
        self.name = name
        self.terms = frozenset(phrases.values())
        self.token_phrases: dict[tuple[str, ...], str] = phrases
        self.max_len = max(len(p) for p in phrases)

    def __len__(self) -> int:
        return len(self.token_phrases)

    def __repr__(self) -> str:
        return f"Taxonomy({self.name!r}, {len(self)} phrases)"


def load_taxonomy(path, name: str | None = None) -> Taxonomy:
    """One phrase per line; blank lines and '#' comments are skipped."""
    terms = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                terms.append(line)
    return Taxonomy(name or Path(path).stem, terms)


def load_scale_table(path) -> dict[str, float]:
    """Two-column 'name,value' file; '#' comments allowed."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            name, value = line.rsplit(",", 1)
            table[name.strip().lower()] = float(value)
    return table


@lru_cache(maxsize=None)
def default_scale_lexicon() -> Taxonomy:
    return load_taxonomy(_DATA_DIR / "scale_adjectives.txt", "scale_adjectives")


@lru_cache(maxsize=None)
def default_fire_causes() -> Taxonomy:
    return load_taxonomy(_DATA_DIR / "fire_causes.txt", "fire_causes")


@lru_cache(maxsize=None)
def default_hail_table() -> dict[str, float]:
    return load_scale_table(_DATA_DIR / "hail_sizes.txt")


@dataclass(frozen=True)
class ScopeFeatures:
    """Composite result of the seven scope indicators; absent slots are None."""

    scale_adjectives: tuple[str, ...] = ()
    alarm_level: int | None = None
    fire_cause: str | None = None
    quake_magnitude: tuple[str, float] | None = None
    wildfire_size_acres: float | None = None
    vehicle_count: int | None = None
    weather_scale: tuple[str, int] | None = None
    hail_size_inches: float | None = None


# ---------------------------------------------------------------------------
# taxonomy indicators
# ---------------------------------------------------------------------------

def match_phrases(tokens: Sequence[str], taxonomy: Taxonomy) -> list[str]:
    """All taxonomy phrases in token order, longest match first, duplicates
    preserved; a matched phrase consumes its tokens."""
    out = []
    i, n = 0, len(tokens)
    while i < n:
        hit = None
        for length in range(min(taxonomy.max_len, n - i), 0, -1):
            cand = tuple(tokens[i : i + length])
            if cand in taxonomy.token_phrases:
                hit = taxonomy.token_phrases[cand]
                break
        if hit is not None:
            out.append(hit)
            i += len(hit.split())
        else:
            i += 1
    return out


def extract_scale_adjectives(
    tokens: Sequence[str], lexicon: Taxonomy | None = None
) -> list[str]:
    return match_phrases(tokens, lexicon or default_scale_lexicon())


def extract_fire_cause(
    tokens: Sequence[str], causes: Taxonomy | None = None
) -> str | None:
    hits = match_phrases(tokens, causes or default_fire_causes())
    return hits[0] if hits else None


# ---------------------------------------------------------------------------
# multiple-alarm fires
# ---------------------------------------------------------------------------

_ALARM_RE = re.compile(r"\b(\d{1,2})\s*(?:st|nd|rd|th)?[\s-]*alarm\b", re.IGNORECASE)


def find_alarm_levels(text: str) -> list[tuple[int, int, int]]:
    out = []
    for m in _ALARM_RE.finditer(text):
        level = int(m.group(1))
        if 1 <= level <= MAX_ALARM_LEVEL:
            out.append((m.start(), m.end(), level))
    return out


def extract_alarm_level(text: str) -> int | None:
    levels = [v for _, _, v in find_alarm_levels(text)]
    return max(levels) if levels else None


# ---------------------------------------------------------------------------
# earthquake magnitudes
# ---------------------------------------------------------------------------

_NUM = r"\d{1,2}(?:\.\d+)?"
_RICHTER_RES = (
    re.compile(rf"\bM\s?({_NUM})(?![\d.])"),      # "M5.8", "M 5.8" (uppercase)
    re.compile(rf"\bm({_NUM})(?![\d.])"),          # attached lowercase "m5.8"
    re.compile(rf"\bmag(?:nitude)?\b[\s:\-]*(?:of\s+)?({_NUM})(?![\d.])", re.IGNORECASE),
    re.compile(rf"(?<![\d.])({_NUM})[\s-]*magnitude\b", re.IGNORECASE),
)
_INTENSITY_RES = (
    re.compile(
        r"\b(?:(mercalli|mmi|ems|csis)[\s-]*)?intensity\b[\s:]*(?:of\s+)?([ivx]+|\d{1,2})\b",
        re.IGNORECASE,
    ),
    re.compile(r"\b(mercalli|mmi|ems|csis)[\s-]+([ivx]+|\d{1,2})\b", re.IGNORECASE),
)
_SHINDO_RE = re.compile(r"\b(?:shindo|jma)\b[\s:]*(\d)\s*([+-])?", re.IGNORECASE)

_ROMAN = {
    "i": 1, "ii": 2, "iii": 3, "iv": 4, "v": 5, "vi": 6,
    "vii": 7, "viii": 8, "ix": 9, "x": 10, "xi": 11, "xii": 12,
}
_INTENSITY_TAGS = {"mmi": "mercalli", "mercalli": "mercalli", "ems": "ems", "csis": "csis"}


def find_quake_magnitudes(text: str) -> list[tuple[int, int, tuple[str, float]]]:
    """(start, end, (scale, value)) candidates; out-of-range values dropped."""
    cands: list[tuple[int, int, tuple[str, float]]] = []
    for rx in _RICHTER_RES:
        for m in rx.finditer(text):
            value = float(m.group(1))
            if 0.0 <= value <= MAX_QUAKE_MAGNITUDE:
                cands.append((m.start(), m.end(), ("richter", value)))
    for rx in _INTENSITY_RES:
        for m in rx.finditer(text):
            raw = m.group(2).lower()
            value = float(_ROMAN[raw]) if raw in _ROMAN else (float(raw) if raw.isdigit() else None)
            if value is None or not 1.0 <= value <= 12.0:
                continue
            tag = _INTENSITY_TAGS.get((m.group(1) or "").lower(), "mercalli")
            cands.append((m.start(), m.end(), (tag, value)))
    for m in _SHINDO_RE.finditer(text):
        base = int(m.group(1))
        if 0 <= base <= 7:
            value = base + (0.5 if m.group(2) == "+" else 0.0)
            cands.append((m.start(), m.end(), ("shindo", value)))
    return select_spans(cands)


def extract_quake_magnitude(text: str) -> tuple[str, float] | None:
    """Largest reported magnitude. A proper magnitude reading (Richter)
    outranks observational intensity readings when both are present;
    within a family the largest value wins."""
    cands = find_quake_magnitudes(text)
    if not cands:
        return None
    richter = [c for c in cands if c[2][0] == "richter"]
    pool = richter or cands
    return max(pool, key=lambda c: (c[2][1], -c[0]))[2]


# ---------------------------------------------------------------------------
# wildfire sizes (normalized to acres)
# ---------------------------------------------------------------------------

_AREA_NUM = r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?"
_AREA_RE = re.compile(
    rf"(?<![\d.])({_AREA_NUM})[\s-]*"
    r"(acres?|sq\.?\s?mi\.?|square\s+miles?|sq\.?\s?km\.?|square\s+kilomet(?:er|re)s?)\b",
    re.IGNORECASE,
)
_RADIUS_RE = re.compile(
    rf"(?<![\d.])({_AREA_NUM})[\s-]*mile[\s-]+radius", re.IGNORECASE
)


def _area_unit(raw: str) -> str:
    raw = raw.lower()
    if raw.startswith("acre"):
        return "acre"
    if "k" in raw:
        return "sq_km"
    return "sq_mi"


def find_wildfire_sizes(text: str) -> list[tuple[int, int, float]]:
    cands = []
    for m in _AREA_RE.finditer(text):
        value = float(m.group(1).replace(",", ""))
        acres = value * ACRES_PER_UNIT[_area_unit(m.group(2))]
        if acres > 0.0:
            cands.append((m.start(), m.end(), acres))
    for m in _RADIUS_RE.finditer(text):
        radius = float(m.group(1).replace(",", ""))
        acres = math.pi * radius * radius * ACRES_PER_UNIT["sq_mi"]
        if acres > 0.0:
            cands.append((m.start(), m.end(), acres))
    return select_spans(cands)


def extract_wildfire_size(text: str) -> float | None:
    cands = find_wildfire_sizes(text)
    return max(v for _, _, v in cands) if cands else None


# ---------------------------------------------------------------------------
# multi-vehicle crashes
# ---------------------------------------------------------------------------

WORD_NUMBERS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
    "thirteen": 13, "fourteen": 14, "fifteen": 15, "sixteen": 16,
    "seventeen": 17, "eighteen": 18, "nineteen": 19, "twenty": 20,
}
_COUNT = r"\d{1,2}|" + "|".join(WORD_NUMBERS)
_VEH_NOUN = r"(?:car|truck|vehicle|van|bus|suv|semi|motorcycle|lorry|trailer)s?"
_CRASH = r"(?:crash(?:e[sd])?|collisions?|pile[\s-]?ups?|wrecks?)"
_HYPHEN_FORM_RE = re.compile(
    rf"\b({_COUNT})[\s-]+{_VEH_NOUN}\s+{_CRASH}\b", re.IGNORECASE
)
_VEH_GROUP_RE = re.compile(
    rf"\b({_COUNT})\s+(?:(?!(?:{_COUNT})\b)[^\W\d]+\s+){{0,2}}?{_VEH_NOUN}\b",
    re.IGNORECASE,
)
_CONNECTOR_RE = re.compile(r"^[\s,]*(?:&|and|plus|\+)?[\s,]*$", re.IGNORECASE)


def _count_value(raw: str) -> int:
    raw = raw.lower()
    return WORD_NUMBERS[raw] if raw in WORD_NUMBERS else int(raw)


def find_vehicle_counts(text: str) -> list[tuple[int, int, int]]:
    """Candidate spans: 'N-car crash' forms plus additive chains of two or
    more counted vehicle groups ('2 trucks & one vehicle' -> 3)."""
    cands: list[tuple[int, int, int]] = []
    for m in _HYPHEN_FORM_RE.finditer(text):
        value = _count_value(m.group(1))
        if value >= 1:
            cands.append((m.start(), m.end(), value))
    groups = [(m.start(), m.end(), _count_value(m.group(1))) for m in _VEH_GROUP_RE.finditer(text)]
    i = 0
    while i < len(groups):
        j = i
        total = groups[i][2]
        while j + 1 < len(groups) and _CONNECTOR_RE.match(text[groups[j][1] : groups[j + 1][0]]):
            j += 1
            total += groups[j][2]
        if j > i and total >= 1:
            cands.append((groups[i][0], groups[j][1], total))
        i = j + 1
    return select_spans(cands)


def extract_vehicle_count(text: str) -> int | None:
    cands = find_vehicle_counts(text)
    return max(v for _, _, v in cands) if cands else None


# ---------------------------------------------------------------------------
# severe weather scales and hail sizes
# ---------------------------------------------------------------------------

_EF_RE = re.compile(r"\bEF[\s-]?(\d)\b", re.IGNORECASE)
_TORRO_RE = re.compile(r"\bT(\d{1,2})\b")
_TORRO_CONTEXT_RE = re.compile(r"\btorro\b|\btornado", re.IGNORECASE)
_BEAUFORT_RE = re.compile(
    r"\b(?:beaufort(?:\s+(?:scale|force))?|force)\s+(\d{1,2})\b", re.IGNORECASE
)
_HAIL_NUM_RES = (
    re.compile(r"(\d+(?:\.\d+)?)[\s-]*(?:inch(?:es)?|in\.?|\")[\s-]*(?:diameter\s+)?hail", re.IGNORECASE),
    re.compile(r"\bhail\s+(?:of\s+|up\s+to\s+)?(\d+(?:\.\d+)?)[\s-]*inch(?:es)?\b", re.IGNORECASE),
)

_SCALE_BOUNDS = {
    "enhanced_fujita": MAX_EF_LEVEL,
    "torro": MAX_TORRO_LEVEL,
    "beaufort": MAX_BEAUFORT_LEVEL,
}


def find_weather_scales(text: str) -> list[tuple[int, int, tuple[str, int]]]:
    cands: list[tuple[int, int, tuple[str, int]]] = []
    for m in _EF_RE.finditer(text):
        cands.append((m.start(), m.end(), ("enhanced_fujita", int(m.group(1)))))
    if _TORRO_CONTEXT_RE.search(text):
        for m in _TORRO_RE.finditer(text):
            cands.append((m.start(), m.end(), ("torro", int(m.group(1)))))
    for m in _BEAUFORT_RE.finditer(text):
        cands.append((m.start(), m.end(), ("beaufort", int(m.group(1)))))
    cands = [c for c in cands if 0 <= c[2][1] <= _SCALE_BOUNDS[c[2][0]]]
    return select_spans(cands)


def _hail_object_res(table: dict[str, float]) -> tuple[re.Pattern, re.Pattern]:
    names = "|".join(re.escape(n) for n in sorted(table, key=len, reverse=True))
    return (
        re.compile(rf"\b({names})[\s-]*(?:sized?)?[\s-]*hail", re.IGNORECASE),
        re.compile(rf"\bhail\s+(?:the\s+)?size\s+of\s+(?:an?\s+)?({names})\b", re.IGNORECASE),
    )


@lru_cache(maxsize=None)
def _default_hail_res() -> tuple[re.Pattern, re.Pattern]:
    return _hail_object_res(default_hail_table())


def find_hail_sizes(text: str, table: dict[str, float] | None = None) -> list[tuple[int, int, float]]:
    if table is None:
        table = default_hail_table()
        object_res = _default_hail_res()
    else:
        object_res = _hail_object_res(table)
    cands = []
    for rx in _HAIL_NUM_RES:
        for m in rx.finditer(text):
            value = float(m.group(1))
            if value > 0.0:
                cands.append((m.start(), m.end(), value))
    for rx in object_res:
        for m in rx.finditer(text):
            cands.append((m.start(), m.end(), table[m.group(1).lower()]))
    return select_spans(cands)


def extract_weather_scale(
    text: str, hail_table: dict[str, float] | None = None
) -> tuple[tuple[str, int] | None, float | None]:
    """(scale, level) for tornado/storm scales plus hail size in inches;
    either half may be absent."""
    scales = find_weather_scales(text)
    scale = max(scales, key=lambda c: (c[2][1], -c[0]))[2] if scales else None
    hails = find_hail_sizes(text, hail_table)
    hail = max(v for _, _, v in hails) if hails else None
    return scale, hail


# ---------------------------------------------------------------------------
# composite
# ---------------------------------------------------------------------------

def extract_scope(
    text: str,
    scale_lexicon: Taxonomy | None = None,
    fire_causes: Taxonomy | None = None,
    hail_table: dict[str, float] | None = None,
) -> ScopeFeatures:
    """Run all seven indicators over one text."""
    tokens = tokenize(text)
    weather, hail = extract_weather_scale(text, hail_table)
    return ScopeFeatures(
        scale_adjectives=tuple(extract_scale_adjectives(tokens, scale_lexicon)),
        alarm_level=extract_alarm_level(text),
        fire_cause=extract_fire_cause(tokens, fire_causes),
        quake_magnitude=extract_quake_magnitude(text),
        wildfire_size_acres=extract_wildfire_size(text),
        vehicle_count=extract_vehicle_count(text),
        weather_scale=weather,
        hail_size_inches=hail,
    )


def scope_pattern_spans(text: str) -> list[tuple[int, int, str]]:
    """Spans claimed by the numeric scope patterns, tagged by feature name.

    Used to discard numeric phrases already explained by a scope indicator
    and to drive masking.
    """
    cands: list[tuple[int, int, str]] = []
    cands.extend((s, e, "scope_alarm_level") for s, e, _ in find_alarm_levels(text))
    cands.extend((s, e, "scope_quake_magnitude") for s, e, _ in find_quake_magnitudes(text))
    cands.extend((s, e, "scope_wildfire_size") for s, e, _ in find_wildfire_sizes(text))
    cands.extend((s, e, "scope_vehicle_count") for s, e, _ in find_vehicle_counts(text))
    cands.extend((s, e, "scope_weather_scale") for s, e, _ in find_weather_scales(text))
    cands.extend((s, e, "scope_hail_size") for s, e, _ in find_hail_sizes(text))
    return select_spans(cands)


def taxonomy_spans(text: str, taxonomy: Taxonomy) -> list[tuple[int, int, str]]:
    """Character spans of taxonomy phrase hits in the raw text."""
    return phrase_spans(text, taxonomy.token_phrases, taxonomy.max_len)
