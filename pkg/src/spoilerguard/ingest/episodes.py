"""Episode list files: ``series,season,episode,title,air_datetime`` CSV."""
from __future__ import annotations

import csv
import io

from ..timeline import Event, EventSeries, MalformedDate, format_iso8601, parse_iso8601

HEADER = ["series", "season", "episode", "title", "air_datetime"]


class MalformedEpisodeList(ValueError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


def parse_episode_list(data: bytes) -> EventSeries:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise MalformedEpisodeList("not UTF-8") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header] != HEADER:
        raise MalformedEpisodeList(f"expected header {','.join(HEADER)}", 1)
    events = []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(HEADER):
            raise MalformedEpisodeList(f"expected {len(HEADER)} fields, got {len(row)}", rowno)
        series, season, episode, title, air = (c.strip() for c in row)
        try:
            events.append(Event(series, int(season), int(episode), title, parse_iso8601(air)))
        except (ValueError, MalformedDate) as exc:
            raise MalformedEpisodeList(str(exc), rowno) from exc
    if not events:
        raise MalformedEpisodeList("no episodes")
    return EventSeries(events)


def serialize_episode_list(series: EventSeries) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for e in series:
        writer.writerow([e.series_id, e.season, e.episode, e.label, format_iso8601(e.air_datetime)])
    return out.getvalue().encode("utf-8")
