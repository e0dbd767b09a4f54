"""Per-wiki aggregates and plot-ready CSV output."""
from __future__ import annotations

import csv
import enum
import math
import statistics
from collections import Counter
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from .analysis import PageStatus, SpoilerReport
from .timeline import EventSeries, PageTimeline, format_iso8601

HISTOGRAM_BINS = 20


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class Stat:
    mean: float | None
    std_dev: float | None
    rel_err: float | None

    @classmethod
    def of(cls, values: Sequence[float]) -> "Stat":
        if not values:
            return cls(None, None, None)
        mean = statistics.fmean(values)
        if len(values) < 2:
            return cls(mean, None, None)
        sd = statistics.stdev(values)
        rel = (sd / math.sqrt(len(values))) / mean if mean > 0 else None
        return cls(mean, sd, rel)


@dataclass(frozen=True)
class WikiAggregate:
    wiki_id: str
    probability: Stat
    revisions_per_day: Stat
    mementos_per_day: Stat
    page_count: int
    unarchived_count: int

    @property
    def unavailability(self) -> float:
        return self.unarchived_count / self.page_count if self.page_count else 0.0


def _days(report: SpoilerReport) -> float | None:
    if report.first_revision is None or report.snapshot_datetime is None:
        return None
    span = report.snapshot_datetime - report.first_revision
    return span / 86400 if span > 0 else None


def aggregate(reports: Sequence[SpoilerReport], wiki_id: str = "") -> WikiAggregate:
    """Table-style statistics over the archived pages of one wiki.

    Per-day rates divide a page's counts by the days from its first revision
    to the export snapshot.
    """
    if not reports:
        raise EmptyInput("no reports to aggregate")
    # sorted so float summation order (and output bytes) ignore input order
    archived = sorted((r for r in reports if r.status is PageStatus.ARCHIVED),
                      key=lambda r: r.page_title)
    rated = [(r, _days(r)) for r in archived]
    rated = [(r, d) for r, d in rated if d]
    return WikiAggregate(
        wiki_id=wiki_id,
        probability=Stat.of(sorted(r.probability for r in archived)),
        revisions_per_day=Stat.of(sorted(r.revision_count / d for r, d in rated)),
        mementos_per_day=Stat.of(sorted(r.memento_count / d for r, d in rated)),
        page_count=len(reports),
        unarchived_count=sum(r.status is PageStatus.UNARCHIVED for r in reports),
    )


class PlotKind(str, enum.Enum):
    AREA_TIMELINE = "area_timeline"
    HISTOGRAM = "histogram"
    CDF = "cdf"
    MISSED_UPDATES = "missed_updates"
    REDUNDANT_MEMENTOS = "redundant_mementos"


@dataclass
class PlotSeries:
    kind: PlotKind
    header: list[str]
    rows: list[list]


def histogram(probabilities: Sequence[float], bins: int = HISTOGRAM_BINS) -> list[int]:
    counts = [0] * bins
    for p in probabilities:
        counts[min(int(p * bins), bins - 1)] += 1
    return counts


def empirical_cdf(values: Sequence[float]) -> list[tuple[float, float]]:
    n = len(values)
    points = []
    for i, v in enumerate(sorted(values), start=1):
        if points and points[-1][0] == v:
            points[-1] = (v, i / n)
        else:
            points.append((v, i / n))
    return points


def _day(t: int) -> str:
    return format_iso8601(t)[:10]


def plot_series(reports: Sequence[SpoilerReport], timelines: Sequence[PageTimeline],
                series: EventSeries) -> dict[PlotKind, PlotSeries]:
    out = {}
    rows = []
    for e in series:
        rows.append([e.air_datetime, e.air_datetime, "", "event", e.label])
    by_title = {t.page_title: t for t in timelines}
    for r in reports:
        t = by_title.get(r.page_title)
        if t is not None:
            rows += [[rv.datetime, rv.datetime, r.page_title, "revision", str(rv.revision_id)]
                     for rv in t.revisions]
            rows += [[m.datetime, m.datetime, r.page_title, "memento", m.uri_m]
                     for m in t.mementos]
        rows += [[a.start, a.end, r.page_title, a.kind.value, a.episode.label] for a in r.areas]
    rows.sort(key=lambda row: (row[0], row[1], row[2], row[3], row[4]))
    out[PlotKind.AREA_TIMELINE] = PlotSeries(
        PlotKind.AREA_TIMELINE, ["start", "end", "page", "kind", "label"], rows)

    probs = [r.probability for r in reports if r.status is PageStatus.ARCHIVED]
    counts = histogram(probs)
    out[PlotKind.HISTOGRAM] = PlotSeries(
        PlotKind.HISTOGRAM, ["bin_start", "bin_end", "count"],
        [[f"{i / HISTOGRAM_BINS:.2f}", f"{(i + 1) / HISTOGRAM_BINS:.2f}", c]
         for i, c in enumerate(counts)])
    out[PlotKind.CDF] = PlotSeries(
        PlotKind.CDF, ["probability", "cumulative_fraction"],
        [[_num(x), _num(y)] for x, y in empirical_cdf(probs)])

    missed, redundant = [], []
    for t in sorted(timelines, key=lambda t: t.page_title):
        mapped = set(t.captures.values())
        per_day = Counter(_day(rv.datetime) for j, rv in enumerate(t.revisions)
                          if j not in mapped)
        missed += [[day, t.page_title, n] for day, n in per_day.items()]
        seen = set()
        extra = Counter()
        for k, m in enumerate(t.mementos):
            j = t.captures.get(k)
            if j is None:
                continue
            if j in seen:
                extra[_day(m.datetime)] += 1
            seen.add(j)
        redundant += [[day, t.page_title, n] for day, n in extra.items()]
    missed.sort()
    redundant.sort()
    out[PlotKind.MISSED_UPDATES] = PlotSeries(
        PlotKind.MISSED_UPDATES, ["day", "page", "count"], missed)
    out[PlotKind.REDUNDANT_MEMENTOS] = PlotSeries(
        PlotKind.REDUNDANT_MEMENTOS, ["day", "page", "count"], redundant)
    return out


def _num(x: float | None) -> str:
    return "n/a" if x is None else f"{x:.6f}"


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_plot_data(reports: Sequence[SpoilerReport], timelines: Sequence[PageTimeline],
                   series: EventSeries, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for kind, ps in plot_series(reports, timelines, series).items():
        path = out_dir / f"plot_{kind.value}.csv"
        write_csv(path, ps.header, ps.rows)
        paths.append(path)
    return paths


REPORT_HEADER = ["page", "status", "probability", "spoiler_seconds", "zone_seconds",
                 "spoiler_areas", "pre_archive_areas", "archive_extant_areas",
                 "revisions", "mementos", "missed_updates", "redundant_mementos"]


def write_reports(reports: Sequence[SpoilerReport], aggregate_: WikiAggregate,
                  out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [[r.page_title, r.status.value, _num(r.probability), r.spoiler_seconds,
             r.zone_seconds, len(r.areas), r.pre_archive_count, r.archive_extant_count,
             r.revision_count, r.memento_count, r.missed_update_count,
             r.redundant_memento_count] for r in reports]
    write_csv(out_dir / "reports.csv", REPORT_HEADER, rows)
    area_rows = [[r.page_title, a.kind.value, format_iso8601(a.start), format_iso8601(a.end),
                  a.start, a.end, a.episode.label] for r in reports for a in r.areas]
    write_csv(out_dir / "areas.csv",
              ["page", "kind", "start", "end", "start_epoch", "end_epoch", "episode"], area_rows)
    agg_header = ["wiki", "pages", "unarchived", "unavailability"]
    agg_row = [aggregate_.wiki_id, aggregate_.page_count, aggregate_.unarchived_count,
               _num(aggregate_.unavailability)]
    for name in ("probability", "revisions_per_day", "mementos_per_day"):
        stat = getattr(aggregate_, name)
        for f in fields(Stat):
            agg_header.append(f"{name}_{f.name}")
            agg_row.append(_num(getattr(stat, f.name)))
    write_csv(out_dir / "aggregate.csv", agg_header, [agg_row])
    return [out_dir / "reports.csv", out_dir / "areas.csv", out_dir / "aggregate.csv"]
