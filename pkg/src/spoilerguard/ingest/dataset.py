"""On-disk dataset layout shared by ``ingest``, ``analyze``, ``serve`` and ``oracle``.

::

    dataset/
      manifest.json     wiki id/uri, snapshot datetime, one entry per page
      pages/<slug>.xml  MediaWiki export for the page
      timemaps/<slug>.link  link-format TimeMap (absent when unarchived)
      episodes.csv      optional episode list
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable
from urllib.parse import quote

from ..timeline import Memento, PageTimeline, format_iso8601, parse_iso8601
from .fetch import Fetcher, HttpError
from .filters import consistency_filter, filter_redirects
from .timemap import TimeMapDocument, parse_timemap, serialize_timemap
from .wikiexport import WikiExportDocument, parse_wiki_export, serialize_wiki_export

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
DEFAULT_TIMEMAP_BASE = "http://web.archive.org/web/timemap/link/"


def page_uri(wiki_uri: str, title: str) -> str:
    return wiki_uri.rstrip("/") + "/wiki/" + quote(title.replace(" ", "_"), safe=":/()_,'!-.~")


def slug(title: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9_.-]+", "_", title)[:80]
    return f"{safe}-{hashlib.sha1(title.encode('utf-8')).hexdigest()[:8]}"


@dataclass
class Dataset:
    root: Path
    wiki_id: str
    wiki_uri: str
    snapshot_datetime: int
    pages: list[dict]
    redirects_removed: int = 0

    @classmethod
    def load(cls, root: str | Path) -> "Dataset":
        root = Path(root)
        with open(root / MANIFEST, encoding="utf-8") as fh:
            meta = json.load(fh)
        return cls(root, meta["wiki_id"], meta["wiki_uri"],
                   parse_iso8601(meta["snapshot_datetime"]), meta["pages"],
                   meta.get("redirects_removed", 0))

    def save(self) -> None:
        meta = {
            "wiki_id": self.wiki_id,
            "wiki_uri": self.wiki_uri,
            "snapshot_datetime": format_iso8601(self.snapshot_datetime),
            "redirects_removed": self.redirects_removed,
            "pages": self.pages,
        }
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / MANIFEST).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")

    def add_page(self, doc: WikiExportDocument, uri_r: str,
                 timemap: TimeMapDocument | None) -> None:
        name = slug(doc.page_title)
        (self.root / "pages").mkdir(parents=True, exist_ok=True)
        (self.root / "pages" / f"{name}.xml").write_bytes(serialize_wiki_export([doc]))
        entry = {"title": doc.page_title, "uri_r": uri_r,
                 "export": f"pages/{name}.xml", "timemap": None}
        if timemap is not None:
            (self.root / "timemaps").mkdir(parents=True, exist_ok=True)
            (self.root / "timemaps" / f"{name}.link").write_bytes(serialize_timemap(timemap))
            entry["timemap"] = f"timemaps/{name}.link"
        self.pages.append(entry)

    def documents(self) -> Iterable[tuple[dict, WikiExportDocument]]:
        for entry in self.pages:
            for doc in parse_wiki_export((self.root / entry["export"]).read_bytes(),
                                         self.snapshot_datetime):
                yield entry, doc

    def timelines(self) -> list[PageTimeline]:
        """Consistency-filtered timelines of every non-redirect page, in manifest order."""
        out = []
        pairs = list(self.documents())
        kept, _ = filter_redirects([doc for _, doc in pairs])
        kept_ids = {id(d) for d in kept}
        for entry, doc in pairs:
            if id(doc) not in kept_ids:
                continue
            mementos = []
            if entry.get("timemap"):
                tm = parse_timemap((self.root / entry["timemap"]).read_bytes())
                mementos = [Memento(u, t) for u, t in tm.mementos]
            timeline = PageTimeline(doc.page_title, entry["uri_r"], doc.revisions,
                                    tuple(mementos), self.snapshot_datetime)
            out.append(consistency_filter(timeline))
        return out


def ingest(export: bytes, dataset_dir: str | Path, wiki_id: str, wiki_uri: str,
           snapshot_datetime: int, fetcher: Fetcher | None = None,
           timemap_base: str = DEFAULT_TIMEMAP_BASE,
           timemaps: dict[str, bytes] | None = None) -> Dataset:
    """Build a dataset from an export and TimeMaps.

    TimeMaps come from ``timemaps`` (keyed by page title) when given,
    otherwise they are fetched through ``fetcher``. A 404 marks the page as
    unarchived; other fetch failures are logged and treated the same way.
    """
    docs = parse_wiki_export(export, snapshot_datetime)
    kept, removed = filter_redirects(docs)
    ds = Dataset(Path(dataset_dir), wiki_id, wiki_uri, snapshot_datetime, [], removed)
    for doc in sorted(kept, key=lambda d: d.page_title):
        uri_r = page_uri(wiki_uri, doc.page_title)
        body = None
        if timemaps is not None:
            body = timemaps.get(doc.page_title)
        elif fetcher is not None:
            try:
                body = fetcher.fetch(timemap_base + uri_r)
            except HttpError as exc:
                if exc.status != 404:
                    log.warning("TimeMap for %s unavailable: %s", doc.page_title, exc)
        tm = parse_timemap(body) if body else None
        ds.add_page(doc, uri_r, tm)
    ds.save()
    return ds
