"""Spoiler areas in sparse web archives and spoiler-safe Memento negotiation for wikis."""

from .analysis import (AreaKind, PageStatus, PotentialSpoilerZone, SpoilerArea, SpoilerReport,
                       analyze_page, analyze_wiki, archive_extant_area,
                       brute_force_spoiler_seconds, pre_archive_area, spoiler_areas,
                       spoiler_probability, union_measure)
from .heuristics import HeuristicKind, Selection, midpoint, select_mindist, select_minpast
from .timeline import (Event, EventSeries, Memento, PageTimeline, Revision, build_capture_map,
                       format_http_date, missed_updates, parse_http_date, redundant_memento_count)

__version__ = "0.1.0"

__all__ = [
    "AreaKind", "PageStatus", "PotentialSpoilerZone", "SpoilerArea", "SpoilerReport",
    "analyze_page", "analyze_wiki", "archive_extant_area", "brute_force_spoiler_seconds",
    "pre_archive_area", "spoiler_areas", "spoiler_probability", "union_measure",
    "HeuristicKind", "Selection", "midpoint", "select_mindist", "select_minpast",
    "Event", "EventSeries", "Memento", "PageTimeline", "Revision", "build_capture_map",
    "format_http_date", "missed_updates", "parse_http_date", "redundant_memento_count",
]
