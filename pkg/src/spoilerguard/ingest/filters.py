from __future__ import annotations

import logging
from typing import Sequence

from ..timeline import PageTimeline
from .wikiexport import WikiExportDocument

log = logging.getLogger(__name__)


def filter_redirects(pages: Sequence[WikiExportDocument]) -> tuple[list[WikiExportDocument], int]:
    """Drop redirect pages. Returns the survivors and how many were removed."""
    kept = [p for p in pages if not p.is_redirect]
    removed = len(pages) - len(kept)
    if removed:
        log.info("removed %d redirect pages, %d remain", removed, len(kept))
    return kept, removed


def consistency_filter(timeline: PageTimeline) -> PageTimeline:
    """Discard mementos captured after the wiki export was taken."""
    kept = [m for m in timeline.mementos if m.datetime <= timeline.snapshot_datetime]
    if len(kept) == len(timeline.mementos):
        return timeline
    return timeline.with_mementos(kept)
