"""Access-log audit: did archive visitors land on revisions newer than they asked for?

The desired datetime is inferred from the referrer's archive URI and the
memento datetime from the visited archive URI. The wiki's own revision list
says which revision the visited memento actually shows.
"""
from __future__ import annotations

import csv
import enum
import gzip
import io
import re
import threading
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence, TextIO
from urllib.parse import parse_qs, unquote, urlsplit

from .ingest.fetch import FetchError, Fetcher
from .ingest.wikiexport import MalformedExport, parse_wiki_export
from .timeline import Revision, format_iso8601, from_datetime

# host ident user [time] "request" status bytes "referrer" "agent"
_LOG_LINE = re.compile(
    r'^(?P<host>\S+) \S+ \S+ \[(?P<time>[^\]]*)\] '
    r'"(?P<request>(?:[^"\\]|\\.)*)" (?P<status>\d{3}|-) (?P<size>\d+|-)'
    r'(?: "(?P<referrer>(?:[^"\\]|\\.)*)"(?: "(?P<agent>(?:[^"\\]|\\.)*)")?)?\s*$')
_ARCHIVE_URI = re.compile(r"(?:^|/)web/(\d{14})([A-Za-z_]*)/(.+)$")

DEFAULT_ASSET_EXTENSIONS = ("js", "css", "png", "jpg", "jpeg", "gif", "ico", "svg")
DEFAULT_NAMESPACES = ("Template", "Category", "Special", "File", "MediaWiki", "User", "Talk")
DEFAULT_AD_DOMAINS = ("doubleclick.net", "googlesyndication.com", "googleadservices.com",
                      "quantserve.com", "scorecardresearch.com")


class MalformedLogLine(ValueError):
    pass


class Category(str, enum.Enum):
    SPOILER = "spoiler"
    SAFE = "safe"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class LogEntry:
    visitor_id: str
    visited_uri: str
    referrer_uri: str
    raw_line: str


@dataclass(frozen=True)
class Classification:
    category: Category
    reason: str = ""
    desired: int | None = None
    memento: int | None = None
    revision: int | None = None
    desired_source: str = "referrer"


def parse_log_line(text: str) -> LogEntry:
    line = text.rstrip("\r\n")
    m = _LOG_LINE.match(line)
    if not m:
        raise MalformedLogLine(line[:200])
    parts = m.group("request").split()
    if len(parts) < 2:
        raise MalformedLogLine(f"bad request field: {m.group('request')!r}")
    referrer = m.group("referrer") or ""
    if referrer == "-":
        referrer = ""
    return LogEntry(m.group("host"), parts[1], referrer, line)


def extract_archive_datetime(uri: str) -> tuple[int, str] | None:
    """``/web/YYYYMMDDHHMMSS[mod_]/target`` -> (epoch seconds, target)."""
    if not uri:
        return None
    parts = urlsplit(uri)
    path = parts.path + ("?" + parts.query if parts.query else "") if parts.scheme else uri
    m = _ARCHIVE_URI.search(path)
    if not m:
        return None
    stamp = m.group(1)
    try:
        dt = datetime(int(stamp[0:4]), int(stamp[4:6]), int(stamp[6:8]), int(stamp[8:10]),
                      int(stamp[10:12]), int(stamp[12:14]), tzinfo=timezone.utc)
    except ValueError:
        return None
    return from_datetime(dt), m.group(3)


def wiki_title(target: str) -> str | None:
    parts = urlsplit(target if "://" in target else "http://" + target)
    if parts.path.startswith("/wiki/"):
        return unquote(parts.path[len("/wiki/"):]).replace("_", " ")
    if parts.path.endswith("index.php"):
        title = parse_qs(parts.query).get("title")
        return title[0].replace("_", " ") if title else None
    return None


@dataclass
class RequestFilter:
    asset_extensions: Sequence[str] = DEFAULT_ASSET_EXTENSIONS
    namespaces: Sequence[str] = DEFAULT_NAMESPACES
    ad_domains: Sequence[str] = DEFAULT_AD_DOMAINS

    def keep(self, entry: LogEntry) -> bool:
        found = extract_archive_datetime(entry.visited_uri)
        target = found[1] if found else entry.visited_uri
        parts = urlsplit(target if "://" in target else "http://" + target)
        host = (parts.hostname or "").lower()
        if any(host == d or host.endswith("." + d) for d in self.ad_domains):
            return False
        ext = parts.path.rsplit("/", 1)[-1].rpartition(".")[2].lower()
        if "." in parts.path.rsplit("/", 1)[-1] and ext in self.asset_extensions:
            return False
        title = wiki_title(target)
        if title and ":" in title:
            ns = title.split(":", 1)[0].strip().lower()
            names = {n.lower() for n in self.namespaces}
            if ns in names or ns.endswith(" talk"):
                return False
        return True

    def apply(self, entries: Iterable[LogEntry]) -> Iterator[LogEntry]:
        return (e for e in entries if self.keep(e))


def filter_requests(entries: Iterable[LogEntry],
                    request_filter: RequestFilter | None = None) -> list[LogEntry]:
    return list((request_filter or RequestFilter()).apply(entries))


RevisionSource = Callable[[str], Sequence[Revision]]


def matching_revision(revisions: Sequence[Revision], memento_datetime: int) -> Revision | None:
    """Latest revision at or before the memento datetime."""
    ordered = sorted(revisions, key=lambda r: (r.datetime, r.revision_id))
    j = bisect_right([r.datetime for r in ordered], memento_datetime) - 1
    return ordered[j] if j >= 0 else None


def classify(entry: LogEntry, revision_source: RevisionSource) -> Classification:
    visited = extract_archive_datetime(entry.visited_uri)
    if visited is None:
        return Classification(Category.INDETERMINATE, "visited URI is not an archive URI")
    t_m, target = visited
    if not entry.referrer_uri:
        return Classification(Category.INDETERMINATE, "no referrer", memento=t_m)
    referred = extract_archive_datetime(entry.referrer_uri)
    if referred is None:
        return Classification(Category.INDETERMINATE, "referrer is not an archive URI", memento=t_m)
    t_a = referred[0]
    try:
        revisions = revision_source(target)
    except (LookupError, FetchError, MalformedExport) as exc:
        return Classification(Category.INDETERMINATE, f"export unavailable: {exc}",
                               desired=t_a, memento=t_m)
    rev = matching_revision(revisions, t_m)
    if rev is None:
        return Classification(Category.INDETERMINATE, "no revision at or before memento",
                              desired=t_a, memento=t_m)
    t_r = rev.datetime
    if t_a < t_r:
        return Classification(Category.SPOILER, "desired datetime precedes revision", t_a, t_m, t_r)
    return Classification(Category.SAFE, "revision at or before desired datetime", t_a, t_m, t_r)


def _key(uri: str) -> tuple[str, str] | None:
    title = wiki_title(uri)
    if title is None:
        return None
    parts = urlsplit(uri if "://" in uri else "http://" + uri)
    host = (parts.hostname or "").lower()
    return host.removeprefix("www."), title


class MappingRevisionSource:
    """Revision lists keyed by page URI (host + wiki title)."""

    def __init__(self, pages: Iterable[tuple[str, Sequence[Revision]]]):
        self._pages = {}
        for uri, revisions in pages:
            key = _key(uri)
            if key is not None:
                self._pages[key] = list(revisions)

    def __call__(self, target: str) -> Sequence[Revision]:
        key = _key(target)
        if key is None or key not in self._pages:
            raise LookupError(f"unknown page {target}")
        return self._pages[key]


class ExportRevisionSource:
    """Fetches full-history exports from the live wiki, memoizing per page."""

    def __init__(self, fetcher: Fetcher):
        self.fetcher = fetcher
        self._memo: dict[tuple[str, str], Sequence[Revision] | Exception] = {}
        self._lock = threading.Lock()

    def export_uri(self, target: str) -> str:
        parts = urlsplit(target if "://" in target else "http://" + target)
        title = (wiki_title(target) or "").replace(" ", "_")
        return (f"{parts.scheme}://{parts.netloc}/index.php?title=Special:Export"
                f"&pages={title}&history=1&action=submit")

    def __call__(self, target: str) -> Sequence[Revision]:
        key = _key(target)
        if key is None:
            raise LookupError(f"not a wiki page: {target}")
        with self._lock:
            if key not in self._memo:
                try:
                    docs = parse_wiki_export(self.fetcher.fetch(self.export_uri(target)))
                    if not docs:
                        raise LookupError(f"empty export for {target}")
                    self._memo[key] = docs[0].revisions
                except (LookupError, FetchError, MalformedExport) as exc:
                    self._memo[key] = exc
            found = self._memo[key]
        if isinstance(found, Exception):
            raise found
        return found


@dataclass
class AuditSummary:
    counts: Counter = field(default_factory=Counter)
    malformed: int = 0
    filtered: int = 0

    @property
    def determinate(self) -> int:
        return self.counts[Category.SPOILER] + self.counts[Category.SAFE]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def spoiler_rate(self) -> float | None:
        """Spoilers among determinate entries."""
        return self.counts[Category.SPOILER] / self.determinate if self.determinate else None

    @property
    def spoiler_rate_all(self) -> float | None:
        return self.counts[Category.SPOILER] / self.total if self.total else None

    def add(self, other: "AuditSummary") -> None:
        self.counts.update(other.counts)
        self.malformed += other.malformed
        self.filtered += other.filtered


def _fmt_rate(rate: float | None) -> str:
    return "n/a" if rate is None else f"{rate:.6f}"


def open_log(path: str | Path) -> TextIO:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", errors="replace")
    return open(path, encoding="utf-8", errors="replace")


RECORD_FIELDS = ["visitor_id", "classification", "t_a", "t_m", "t_r", "t_a_source", "reason"]


def audit_lines(lines: Iterable[str], revision_source: RevisionSource,
                request_filter: RequestFilter | None = None,
                records: TextIO | None = None) -> AuditSummary:
    """Stream lines through parse, filter and classify; optionally write one CSV row each."""
    request_filter = request_filter or RequestFilter()
    summary = AuditSummary()
    writer = None
    if records is not None:
        writer = csv.writer(records, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
    for line in lines:
        if not line.strip():
            continue
        try:
            entry = parse_log_line(line)
        except MalformedLogLine:
            summary.malformed += 1
            continue
        if not request_filter.keep(entry):
            summary.filtered += 1
            continue
        c = classify(entry, revision_source)
        summary.counts[c.category] += 1
        if writer is not None:
            writer.writerow([entry.visitor_id, c.category.value, _iso(c.desired), _iso(c.memento),
                             _iso(c.revision), c.desired_source, c.reason])
    return summary


def _iso(t: int | None) -> str:
    return "" if t is None else format_iso8601(t)


def audit_log_file(path: str | Path, revision_source: RevisionSource,
                   request_filter: RequestFilter | None = None,
                   records: TextIO | None = None) -> AuditSummary:
    with open_log(path) as fh:
        return audit_lines(fh, revision_source, request_filter, records)


def format_summary(summary: AuditSummary) -> str:
    lines = [f"{c.value}: {summary.counts[c]}" for c in Category]
    lines += [f"malformed: {summary.malformed}",
              f"filtered: {summary.filtered}",
              f"spoiler_rate_determinate: {_fmt_rate(summary.spoiler_rate)}",
              f"spoiler_rate_all: {_fmt_rate(summary.spoiler_rate_all)}"]
    return "\n".join(lines) + "\n"
