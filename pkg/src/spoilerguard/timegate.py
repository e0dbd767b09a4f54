"""A standalone Memento TimeGate/TimeMap service over a complete revision store.

Negotiation defaults to minpast, which never redirects into the future of the
requested datetime. Requests that cannot be answered safely get a 406.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Iterable, Mapping, Sequence
from urllib.parse import parse_qs, quote, unquote

from .heuristics import HeuristicKind, NoMementoAtOrBefore, select
from .ingest.timemap import TimeMapDocument, serialize_timemap
from .timeline import MalformedDate, PageTimeline, format_http_date, parse_http_date

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StoredRevision:
    revision_id: int
    datetime: int
    uri_m: str


@dataclass(frozen=True)
class StoreEntry:
    uri_r: str
    title: str
    revisions: tuple[StoredRevision, ...]

    @property
    def times(self) -> list[int]:
        return [r.datetime for r in self.revisions]


@dataclass(frozen=True)
class NegotiationResult:
    chosen_uri_m: str
    memento_datetime: int
    heuristic: HeuristicKind


@dataclass
class Response:
    status: int
    headers: list[tuple[str, str]] = field(default_factory=list)
    body: bytes = b""

    def header(self, name: str) -> str | None:
        for k, v in self.headers:
            if k.lower() == name.lower():
                return v
        return None


class RevisionStore:
    """Immutable snapshot of every page's revisions, addressable by URI-R and URI-M."""

    def __init__(self, base_url: str, entries: Iterable[tuple[str, str, Sequence[tuple[int, int]]]],
                 oldid_style: bool = False, content: Mapping[str, bytes] | None = None):
        self.base_url = base_url.rstrip("/")
        self.oldid_style = oldid_style
        self.content = dict(content or {})
        self._by_uri_r: dict[str, StoreEntry] = {}
        self._by_uri_m: dict[str, tuple[StoreEntry, StoredRevision]] = {}
        for uri_r, title, revs in entries:
            stored = tuple(StoredRevision(rid, dt, self.memento_uri(title, rid))
                           for rid, dt in sorted(revs, key=lambda r: (r[1], r[0])))
            if not stored:
                raise ValueError(f"{uri_r}: no revisions")
            entry = StoreEntry(uri_r, title, stored)
            self._by_uri_r[uri_r] = entry
            for r in stored:
                if r.uri_m in self._by_uri_m:
                    raise ValueError(f"duplicate URI-M {r.uri_m}")
                self._by_uri_m[r.uri_m] = (entry, r)

    @classmethod
    def from_timelines(cls, base_url: str, timelines: Iterable[PageTimeline],
                       oldid_style: bool = False) -> "RevisionStore":
        return cls(base_url, ((t.uri_r, t.page_title,
                               [(r.revision_id, r.datetime) for r in t.revisions])
                              for t in timelines if t.revisions), oldid_style)

    def memento_uri(self, title: str, revision_id: int) -> str:
        if self.oldid_style:
            return f"{self.base_url}/index.php?title={quote(title.replace(' ', '_'))}&oldid={revision_id}"
        return f"{self.base_url}/memento/{revision_id}"

    def timegate_uri(self, uri_r: str) -> str:
        return f"{self.base_url}/timegate/{uri_r}"

    def timemap_uri(self, uri_r: str) -> str:
        return f"{self.base_url}/timemap/{uri_r}"

    def entry(self, uri_r: str) -> StoreEntry | None:
        return self._by_uri_r.get(uri_r)

    def revision(self, uri_m: str) -> tuple[StoreEntry, StoredRevision] | None:
        return self._by_uri_m.get(uri_m)

    def __len__(self) -> int:
        return len(self._by_uri_r)

    def timemap(self, uri_r: str) -> TimeMapDocument | None:
        entry = self.entry(uri_r)
        if entry is None:
            return None
        return TimeMapDocument(entry.uri_r, self.timemap_uri(uri_r), self.timegate_uri(uri_r),
                               tuple((r.uri_m, r.datetime) for r in entry.revisions))


def negotiate(entry: StoreEntry, desired: int, heuristic: HeuristicKind) -> NegotiationResult:
    sel = select(heuristic, entry.times, desired)
    chosen = entry.revisions[sel.index]
    return NegotiationResult(chosen.uri_m, chosen.datetime, HeuristicKind(heuristic))


def _link(uri: str, rel: str, **params: str) -> str:
    extra = "".join(f'; {k}="{v}"' for k, v in params.items())
    return f'<{uri}>; rel="{rel}"{extra}'


def _text(status: int, message: str, headers: list[tuple[str, str]] | None = None) -> Response:
    return Response(status, [("Content-Type", "text/plain; charset=utf-8")] + (headers or []),
                    (message + "\n").encode("utf-8"))


class TimeGateApp:
    def __init__(self, store: RevisionStore, default_heuristic: HeuristicKind = HeuristicKind.MINPAST,
                 clock: Callable[[], float] = time.time):
        self.store = store
        self.default_heuristic = HeuristicKind(default_heuristic)
        self.clock = clock

    def reload(self, store: RevisionStore) -> None:
        # single reference assignment; in-flight requests keep their snapshot
        self.store = store

    def handle(self, method: str, target: str, headers: Mapping[str, str]) -> Response:
        store = self.store
        if method not in ("GET", "HEAD"):
            return _text(405, "method not allowed", [("Allow", "GET, HEAD")])
        path, _, query = target.partition("?")
        headers = {k.lower(): v for k, v in headers.items()}
        if path == "/healthz":
            return Response(200, [("Content-Type", "application/json")],
                            json.dumps({"status": "ok", "resources": len(store)}).encode())
        if path.startswith("/timegate/"):
            return self.timegate(store, unquote(path[len("/timegate/"):]), query, headers)
        if path.startswith("/timemap/"):
            return self.timemap(store, unquote(path[len("/timemap/"):]))
        found = store.revision(store.base_url + target)
        if found is not None:
            return self.memento(store, *found)
        return _text(404, "not found")

    def timegate(self, store: RevisionStore, uri_r: str, query: str,
                 headers: Mapping[str, str]) -> Response:
        params = parse_qs(query)
        try:
            heuristic = HeuristicKind(params.get("heuristic", [self.default_heuristic.value])[0])
        except ValueError:
            return _text(400, "heuristic must be mindist or minpast")
        entry = store.entry(uri_r)
        if entry is None:
            return _text(404, f"no revisions for {uri_r}")
        raw = headers.get("accept-datetime")
        if raw is None:
            desired = int(self.clock())
        else:
            try:
                desired = parse_http_date(raw)
            except MalformedDate:
                return _text(400, f"malformed Accept-Datetime: {raw}")
        first, last = entry.revisions[0], entry.revisions[-1]
        links = ", ".join([
            _link(uri_r, "original"),
            _link(store.timemap_uri(uri_r), "timemap", type="application/link-format"),
            _link(first.uri_m, "first memento", datetime=format_http_date(first.datetime)),
            _link(last.uri_m, "last memento", datetime=format_http_date(last.datetime)),
        ])
        common = [("Vary", "accept-datetime"), ("Link", links)]
        try:
            result = negotiate(entry, desired, heuristic)
        except NoMementoAtOrBefore:
            return _text(406, "no revision exists at or before %s; refusing to redirect "
                         "to a later revision, which could contain spoilers"
                         % format_http_date(desired), common)
        return Response(302, [("Location", result.chosen_uri_m)] + common
                        + [("Content-Length", "0")])

    def timemap(self, store: RevisionStore, uri_r: str) -> Response:
        doc = store.timemap(uri_r)
        if doc is None:
            return _text(404, f"no revisions for {uri_r}")
        return Response(200, [("Content-Type", "application/link-format")], serialize_timemap(doc))

    def memento(self, store: RevisionStore, entry: StoreEntry, rev: StoredRevision) -> Response:
        body = store.content.get(rev.uri_m)
        if body is None:
            body = (f"revision {rev.revision_id} of {entry.title} "
                    f"({format_http_date(rev.datetime)})\n").encode("utf-8")
        links = ", ".join([_link(entry.uri_r, "original"),
                           _link(store.timegate_uri(entry.uri_r), "timegate"),
                           _link(store.timemap_uri(entry.uri_r), "timemap",
                                 type="application/link-format")])
        return Response(200, [("Memento-Datetime", format_http_date(rev.datetime)),
                              ("Link", links),
                              ("Content-Type", "text/plain; charset=utf-8")], body)


def make_handler(app: TimeGateApp) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _serve(self, head: bool) -> None:
            resp = app.handle("GET", self.path, dict(self.headers.items()))
            self.send_response(resp.status)
            for k, v in resp.headers:
                self.send_header(k, v)
            if resp.header("Content-Length") is None:
                self.send_header("Content-Length", str(len(resp.body)))
            self.end_headers()
            if not head:
                self.wfile.write(resp.body)

        def do_GET(self):
            self._serve(head=False)

        def do_HEAD(self):
            self._serve(head=True)

        def log_message(self, fmt, *args):
            log.info("%s - %s", self.address_string(), fmt % args)

    return Handler


def make_server(app: TimeGateApp, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), make_handler(app))
