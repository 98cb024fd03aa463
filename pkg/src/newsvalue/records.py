"""Shared record types and newline-delimited JSON file handling.

Every corpus artifact (tweets, profiles, headlines, labels, predictions)
is a file of one JSON object per line so pipelines stay greppable and
streamable. Malformed lines are reported with their line number and
skipped, never fatal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Optional, TypeVar

if TYPE_CHECKING:
    from .geo import GazetteerEntry

T = TypeVar("T")

OUTLETS = frozenset({"reuters", "ap", "afp", "cnn", "bbc"})

SOURCE_CATEGORIES = (
    "local_news",
    "local_journalist",
    "fire_emergency",
    "police_traffic",
    "local_authority",
    "disaster_monitor",
    "quake_monitor",
    "weather_monitor",
)

# Disaster-related topic codes; the topic alphabet for account typing,
# tweet topics, and rarity.
TRBC_CODES = (
    "disasters_accidents",
    "earthquakes_seismic",
    "fires_explosions",
    "floods",
    "severe_weather",
    "terrorism_insurgency",
    "violence_crime",
    "war_military_conflict",
)

# Codes whose tagged stories also carry the listed ancestor tag; used when
# sampling per-code headline sets so the ancestor's sample stays disjoint.
TRBC_DESCENDANTS = {
    "disasters_accidents": frozenset(
        {"earthquakes_seismic", "fires_explosions", "floods", "severe_weather"}
    ),
}


@dataclass(frozen=True)
class Post:
    """One short report (tweet-like)."""

    post_id: str
    user_id: str
    created_at: int
    text: str
    lat: Optional[float] = None
    lon: Optional[float] = None

    def to_record(self) -> dict:
        rec = {
            "post_id": self.post_id,
            "user_id": self.user_id,
            "created_at": self.created_at,
            "text": self.text,
        }
        if self.lat is not None:
            rec["lat"] = self.lat
        if self.lon is not None:
            rec["lon"] = self.lon
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Post":
        return cls(
            post_id=str(rec["post_id"]),
            user_id=str(rec["user_id"]),
            created_at=int(rec["created_at"]),
            text=str(rec["text"]),
            lat=float(rec["lat"]) if rec.get("lat") is not None else None,
            lon=float(rec["lon"]) if rec.get("lon") is not None else None,
        )


@dataclass
class SourceProfile:
    """A candidate or curated reporting account."""

    user_id: str
    display_name: str = ""
    description: str = ""
    followers: int = 0
    friends: int = 0
    profile_location: str = ""
    resolved_location: Optional["GazetteerEntry"] = None
    category: Optional[str] = None
    locally_focused: bool = False
    informativeness: float = 0.0

    def to_record(self) -> dict:
        rec = {
            "user_id": self.user_id,
            "display_name": self.display_name,
            "description": self.description,
            "followers": self.followers,
            "friends": self.friends,
            "profile_location": self.profile_location,
            "locally_focused": self.locally_focused,
            "informativeness": self.informativeness,
        }
        if self.category is not None:
            rec["category"] = self.category
        if self.resolved_location is not None:
            rec["resolved_name"] = self.resolved_location.name
            rec["resolved_country"] = self.resolved_location.country_code
            rec["resolved_lat"] = self.resolved_location.lat
            rec["resolved_lon"] = self.resolved_location.lon
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "SourceProfile":
        category = rec.get("category")
        if category is not None and category not in SOURCE_CATEGORIES:
            raise ValueError(f"unknown source category {category!r}")
        resolved = None
        if rec.get("resolved_name") is not None:
            from .geo import GazetteerEntry

            resolved = GazetteerEntry(
                name=str(rec["resolved_name"]),
                aliases=(),
                lat=float(rec.get("resolved_lat", 0.0)),
                lon=float(rec.get("resolved_lon", 0.0)),
                country_code=str(rec.get("resolved_country", "")),
            )
        return cls(
            user_id=str(rec["user_id"]),
            display_name=str(rec.get("display_name", "")),
            description=str(rec.get("description", "")),
            followers=int(rec.get("followers", 0)),
            friends=int(rec.get("friends", 0)),
            profile_location=str(rec.get("profile_location", "")),
            resolved_location=resolved,
            category=category,
            locally_focused=bool(rec.get("locally_focused", False)),
            informativeness=float(rec.get("informativeness", 0.0)),
        )


@dataclass(frozen=True)
class Headline:
    """One wire headline from the five global outlets."""

    text: str
    outlet: str
    published_at: int
    topic_codes: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.outlet not in OUTLETS:
            raise ValueError(f"unknown outlet {self.outlet!r}")

    def to_record(self) -> dict:
        return {
            "text": self.text,
            "outlet": self.outlet,
            "published_at": self.published_at,
            "topic_codes": sorted(self.topic_codes),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Headline":
        return cls(
            text=str(rec["text"]),
            outlet=str(rec["outlet"]),
            published_at=int(rec["published_at"]),
            topic_codes=frozenset(rec.get("topic_codes", ())),
        )


@dataclass(frozen=True)
class TopicAssignment:
    """How many stories of one topic an account participated in."""

    user_id: str
    topic: str
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("assignment count must be positive")

    @classmethod
    def from_record(cls, rec: dict) -> "TopicAssignment":
        return cls(str(rec["user_id"]), str(rec["topic"]), int(rec["count"]))

    def to_record(self) -> dict:
        return {"user_id": self.user_id, "topic": self.topic, "count": self.count}


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector plus its noisy global-coverage label."""

    post_id: str
    features: dict[str, float]
    label: bool
    label_provenance: str = "direct"  # "direct" | "via_link"


def read_ndjson(
    path, parse: Callable[[dict], T]
) -> tuple[list[T], list[tuple[int, str]]]:
    """Parse one JSON object per line; returns (records, [(lineno, error)])."""
    out: list[T] = []
    errors: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(parse(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                errors.append((lineno, str(exc) or exc.__class__.__name__))
    return out, errors


def write_ndjson(path, records: Iterable[dict]) -> int:
    """One sorted-key JSON object per line; returns the number written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True))
            fh.write("\n")
            n += 1
    return n
