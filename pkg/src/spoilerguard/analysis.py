"""Spoiler areas under mindist negotiation and the per-page spoiler probability.

Areas are half-open second intervals ``[start, end)``. A second ``t`` lies in
a spoiler area when a user asking for ``t`` (before some episode) is handed
a memento whose captured revision is newer than that episode.
"""
from __future__ import annotations

import enum
import logging
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .heuristics import midpoint
from .timeline import (Event, EventSeries, PageTimeline, missed_updates,
                       redundant_memento_count)

log = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 10**6


class AreaKind(str, enum.Enum):
    PRE_ARCHIVE = "pre-archive"
    ARCHIVE_EXTANT = "archive-extant"


class PageStatus(str, enum.Enum):
    ARCHIVED = "archived"
    UNARCHIVED = "unarchived"
    ERROR = "error"


class NoCapturedMemento(LookupError):
    """The page has no memento that captured any of its revisions."""


class ZoneTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SpoilerArea:
    kind: AreaKind
    start: int
    end: int
    episode: Event

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"empty spoiler area [{self.start}, {self.end})")

    @property
    def width(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class PotentialSpoilerZone:
    start: int
    end: int

    @classmethod
    def of(cls, series: EventSeries) -> "PotentialSpoilerZone":
        return cls(series.first.air_datetime, series.last.air_datetime)

    @property
    def width(self) -> int:
        return self.end - self.start


@dataclass
class SpoilerReport:
    page_title: str
    status: PageStatus
    probability: float = 0.0
    spoiler_seconds: int = 0
    zone_seconds: int = 0
    areas: list[SpoilerArea] = field(default_factory=list)
    revision_count: int = 0
    memento_count: int = 0
    missed_update_count: int = 0
    redundant_memento_count: int = 0
    first_revision: int | None = None
    snapshot_datetime: int | None = None
    message: str = ""

    @property
    def pre_archive_count(self) -> int:
        return sum(a.kind is AreaKind.PRE_ARCHIVE for a in self.areas)

    @property
    def archive_extant_count(self) -> int:
        return sum(a.kind is AreaKind.ARCHIVE_EXTANT for a in self.areas)


def _mapped_times(timeline: PageTimeline) -> tuple[list[int], list[int]]:
    pairs = timeline.mapped_mementos()
    return [m.datetime for m, _ in pairs], [r.datetime for _, r in pairs]


def pre_archive_area(episode: Event, series: EventSeries,
                     timeline: PageTimeline) -> SpoilerArea | None:
    """Area before the first capture where mindist jumps past ``episode``.

    Every request earlier than the first mapped memento is answered with it,
    so all of ``[first episode, episode)`` is spoiled when the captured
    revision postdates the episode.
    """
    pairs = timeline.mapped_mementos()
    if not pairs:
        raise NoCapturedMemento(timeline.page_title)
    first_memento, first_rev = pairs[0]
    t_e = episode.air_datetime
    if t_e < first_rev.datetime and t_e < first_memento.datetime:
        start = series.first.air_datetime
        if start < t_e:
            return SpoilerArea(AreaKind.PRE_ARCHIVE, start, t_e, episode)
    return None


def archive_extant_area(episode: Event, timeline: PageTimeline) -> SpoilerArea | None:
    """Area past the midpoint of the memento pair that straddles ``episode``.

    The midpoint second itself resolves to the earlier memento, so the area
    starts one second after it.
    """
    times, rev_times = _mapped_times(timeline)
    t_e = episode.air_datetime
    k = bisect_right(times, t_e)
    if k == 0 or k == len(times) or not times[k - 1] < t_e:
        return None
    t_h = midpoint(times[k - 1], times[k])
    if t_h < t_e < rev_times[k] and t_h + 1 < t_e:
        return SpoilerArea(AreaKind.ARCHIVE_EXTANT, t_h + 1, t_e, episode)
    return None


def spoiler_areas(series: EventSeries, timeline: PageTimeline) -> list[SpoilerArea]:
    """All areas for every episode, clipped to the potential spoiler zone."""
    if not len(series):
        raise ValueError("empty episode series")
    if not timeline.captures:
        raise NoCapturedMemento(timeline.page_title)
    zone = PotentialSpoilerZone.of(series)
    areas = []
    for episode in series:
        for area in (pre_archive_area(episode, series, timeline),
                     archive_extant_area(episode, timeline)):
            if area is None:
                continue
            start, end = max(area.start, zone.start), min(area.end, zone.end)
            if start < end:
                areas.append(SpoilerArea(area.kind, start, end, area.episode))
    areas.sort(key=lambda a: (a.start, a.end))
    return areas


def union_measure(intervals: Iterable[tuple[int, int]]) -> int:
    """Seconds covered by the union of half-open intervals."""
    total = 0
    cur_start = cur_end = None
    for start, end in sorted(intervals):
        if cur_end is None or start > cur_end:
            if cur_end is not None:
                total += cur_end - cur_start
            cur_start, cur_end = start, end
        elif end > cur_end:
            cur_end = end
    if cur_end is not None:
        total += cur_end - cur_start
    return total


def spoiler_probability(areas: Sequence[SpoilerArea],
                        zone: PotentialSpoilerZone) -> tuple[int, int, float]:
    """Return ``(s, c, s / c)``; overlapping areas are counted once."""
    c = zone.width
    s = union_measure((a.start, a.end) for a in areas)
    return s, c, (s / c if c > 0 else 0.0)


def brute_force_spoiler_seconds(series: EventSeries, timeline: PageTimeline,
                                cap: int = DEFAULT_ORACLE_CAP) -> int:
    """Count spoiler seconds by negotiating every second of the zone.

    Verification oracle: independent of the area formulas. For every second
    it picks the nearest memento by exhaustive distance comparison, finds the
    revision that memento captured by scanning the revision list, and checks
    whether some episode falls strictly between the request and that revision.
    """
    zone = PotentialSpoilerZone.of(series)
    if zone.width > cap:
        raise ZoneTooLarge(f"zone of {zone.width} s exceeds cap {cap}")
    rev_times = [r.datetime for r in timeline.revisions]
    mem_times, captured = [], []
    for m in timeline.mementos:
        earlier = [t for t in rev_times if t <= m.datetime]
        if earlier:  # uncaptured mementos deliver nothing analyzable
            mem_times.append(m.datetime)
            captured.append(max(earlier))
    if not mem_times or zone.width <= 0:
        return 0
    mems = np.asarray(mem_times, dtype=np.int64)[:, None]
    caps = np.asarray(captured, dtype=np.int64)
    episodes = np.sort(np.asarray(series.times, dtype=np.int64))
    total = 0
    for lo in range(zone.start, zone.end, 1 << 16):
        t_a = np.arange(lo, min(lo + (1 << 16), zone.end), dtype=np.int64)
        # argmin keeps the first minimum: ties go to the earlier memento
        chosen = np.abs(mems - t_a).argmin(axis=0)
        t_r = caps[chosen]
        after_request = np.searchsorted(episodes, t_a, side="right")
        before_revision = np.searchsorted(episodes, t_r, side="left")
        total += int(np.count_nonzero(before_revision > after_request))
    return total


def analyze_page(series: EventSeries, timeline: PageTimeline) -> SpoilerReport:
    revisions = timeline.revisions
    report = SpoilerReport(
        page_title=timeline.page_title,
        status=PageStatus.ARCHIVED,
        revision_count=len(revisions),
        memento_count=len(timeline.mementos),
        missed_update_count=len(missed_updates(timeline)),
        redundant_memento_count=redundant_memento_count(timeline),
        first_revision=revisions[0].datetime if revisions else None,
        snapshot_datetime=timeline.snapshot_datetime,
    )
    try:
        areas = spoiler_areas(series, timeline)
    except NoCapturedMemento:
        report.status = PageStatus.UNARCHIVED
        report.zone_seconds = PotentialSpoilerZone.of(series).width
        return report
    except Exception as exc:  # one bad page must not abort a wiki
        log.warning("page %r failed: %s", timeline.page_title, exc)
        report.status = PageStatus.ERROR
        report.message = str(exc)
        return report
    s, c, p = spoiler_probability(areas, PotentialSpoilerZone.of(series))
    report.areas = areas
    report.spoiler_seconds, report.zone_seconds, report.probability = s, c, p
    return report


def analyze_wiki(series: EventSeries, timelines: Sequence[PageTimeline],
                 workers: int = 1) -> list[SpoilerReport]:
    """One report per page, in input order."""
    if workers <= 1:
        return [analyze_page(series, t) for t in timelines]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: analyze_page(series, t), timelines))
