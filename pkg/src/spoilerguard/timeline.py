"""Core timeline types: episodes, revisions, mementos and the capture map.

All datetimes are integer seconds since the Unix epoch (UTC).
"""
from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Mapping, Sequence

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

_WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
           "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
_HTTP_DATE = re.compile(
    r"^(?:%s), (\d{2}) (%s) (\d{4}) (\d{2}):(\d{2}):(\d{2}) GMT$"
    % ("|".join(_WEEKDAYS), "|".join(_MONTHS))
)


class MalformedDate(ValueError):
    """Raised for datetime strings that are not RFC 1123 GMT dates."""


def to_datetime(seconds: int) -> datetime:
    return EPOCH + timedelta(seconds=seconds)


def from_datetime(dt: datetime) -> int:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    delta = dt - EPOCH
    return delta.days * 86400 + delta.seconds


def parse_http_date(text: str) -> int:
    """Parse ``Sun, 17 Apr 2011 00:00:00 GMT`` into epoch seconds."""
    m = _HTTP_DATE.match(text.strip())
    if not m:
        raise MalformedDate(f"not an RFC 1123 date: {text!r}")
    day, mon, year, hh, mm, ss = m.groups()
    try:
        dt = datetime(int(year), _MONTHS.index(mon) + 1, int(day),
                      int(hh), int(mm), int(ss), tzinfo=timezone.utc)
    except ValueError as exc:
        raise MalformedDate(f"invalid calendar date: {text!r}") from exc
    return from_datetime(dt)


def format_http_date(seconds: int) -> str:
    # built by hand so the output never depends on the process locale
    dt = to_datetime(seconds)
    return "%s, %02d %s %04d %02d:%02d:%02d GMT" % (
        _WEEKDAYS[dt.weekday()], dt.day, _MONTHS[dt.month - 1], dt.year,
        dt.hour, dt.minute, dt.second)


def parse_iso8601(text: str) -> int:
    """Parse an ISO-8601 date or datetime; date-only values mean midnight UTC.

    Naive datetimes are taken as UTC.
    """
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedDate(f"not an ISO-8601 datetime: {text!r}") from exc
    return from_datetime(dt)


def format_iso8601(seconds: int) -> str:
    return to_datetime(seconds).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Event:
    series_id: str
    season: int
    episode: int
    label: str
    air_datetime: int

    def __post_init__(self):
        if self.season < 0 or self.episode < 0:
            raise ValueError("season and episode numbers must be >= 0")


@dataclass(frozen=True)
class EventSeries:
    """Episodes in air order; ties keep season/episode order."""

    events: tuple[Event, ...]

    def __init__(self, events: Sequence[Event]):
        ordered = sorted(events, key=lambda e: (e.air_datetime, e.season, e.episode))
        object.__setattr__(self, "events", tuple(ordered))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def first(self) -> Event:
        return self.events[0]

    @property
    def last(self) -> Event:
        return self.events[-1]

    @property
    def times(self) -> list[int]:
        return [e.air_datetime for e in self.events]


@dataclass(frozen=True)
class Revision:
    revision_id: int
    datetime: int
    is_redirect: bool = False


@dataclass(frozen=True)
class Memento:
    uri_m: str
    datetime: int

    def __post_init__(self):
        if not self.uri_m:
            raise ValueError("memento URI must be non-empty")


def sort_revisions(revisions: Sequence[Revision]) -> list[Revision]:
    # equal datetimes: the larger id is the later revision
    return sorted(revisions, key=lambda r: (r.datetime, r.revision_id))


def sort_mementos(mementos: Sequence[Memento]) -> list[Memento]:
    return sorted(mementos, key=lambda m: (m.datetime, m.uri_m))


def build_capture_map(revisions: Sequence[Revision],
                      mementos: Sequence[Memento]) -> dict[int, int]:
    """Map memento index -> index of the revision it captured.

    A memento captures the latest revision at or before its own datetime.
    Mementos older than every revision are left unmapped.
    """
    times = [r.datetime for r in revisions]
    captures = {}
    for k, m in enumerate(mementos):
        j = bisect_right(times, m.datetime) - 1
        if j >= 0:
            captures[k] = j
    return captures


@dataclass(frozen=True)
class PageTimeline:
    """One wiki page: its revisions, its archive mementos and how they relate.

    Revisions and mementos are sorted on construction and the capture map
    is derived from them, so it can never go stale.
    """

    page_title: str
    uri_r: str
    revisions: tuple[Revision, ...]
    mementos: tuple[Memento, ...]
    snapshot_datetime: int
    captures: Mapping[int, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        revs = tuple(sort_revisions(self.revisions))
        mems = tuple(sort_mementos(self.mementos))
        object.__setattr__(self, "revisions", revs)
        object.__setattr__(self, "mementos", mems)
        object.__setattr__(self, "captures", build_capture_map(revs, mems))

    def with_mementos(self, mementos: Sequence[Memento]) -> "PageTimeline":
        return PageTimeline(self.page_title, self.uri_r, self.revisions,
                            tuple(mementos), self.snapshot_datetime)

    def captured_revision(self, memento_index: int) -> Revision | None:
        j = self.captures.get(memento_index)
        return None if j is None else self.revisions[j]

    def mapped_mementos(self) -> list[tuple[Memento, Revision]]:
        """(memento, captured revision) pairs, skipping unmapped mementos."""
        return [(m, self.revisions[self.captures[k]])
                for k, m in enumerate(self.mementos) if k in self.captures]

    @property
    def is_redirect(self) -> bool:
        return bool(self.revisions) and self.revisions[-1].is_redirect


def missed_updates(timeline: PageTimeline) -> list[Revision]:
    """Revisions that no memento captured, in datetime order."""
    mapped = set(timeline.captures.values())
    return [r for j, r in enumerate(timeline.revisions) if j not in mapped]


def redundant_memento_count(timeline: PageTimeline) -> int:
    return len(timeline.captures) - len(set(timeline.captures.values()))
