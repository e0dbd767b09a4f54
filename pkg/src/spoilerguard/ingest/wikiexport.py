"""MediaWiki XML export reader (page > title, redirect?, revision > id, timestamp)."""
from __future__ import annotations

import io
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import BinaryIO, Iterator

from ..timeline import MalformedDate, Revision, format_iso8601, parse_iso8601

log = logging.getLogger(__name__)

_REDIRECT_TEXT = re.compile(r"^\s*#REDIRECT", re.IGNORECASE)


class MalformedExport(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class WikiExportDocument:
    page_title: str
    revisions: tuple[Revision, ...]
    is_redirect: bool
    snapshot_datetime: int | None = None


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child(elem: ET.Element, name: str) -> ET.Element | None:
    for c in elem:
        if _local(c.tag) == name:
            return c
    return None


def _page_document(page: ET.Element, snapshot: int | None) -> WikiExportDocument:
    title_el = _child(page, "title")
    if title_el is None or not (title_el.text or "").strip():
        raise ValueError("page without title")
    title = title_el.text.strip()
    revisions = []
    latest_text = None
    latest_key = None
    for rev in page:
        if _local(rev.tag) != "revision":
            continue
        rid, ts = _child(rev, "id"), _child(rev, "timestamp")
        if rid is None or ts is None:
            raise ValueError(f"{title}: revision missing id or timestamp")
        r = Revision(int(rid.text), parse_iso8601(ts.text or ""))
        revisions.append(r)
        key = (r.datetime, r.revision_id)
        if latest_key is None or key > latest_key:
            latest_key = key
            text_el = _child(rev, "text")
            latest_text = (text_el.text or "") if text_el is not None else ""
    if not revisions:
        raise ValueError(f"{title}: no revisions")
    redirect = _child(page, "redirect") is not None or bool(
        latest_text and _REDIRECT_TEXT.match(latest_text))
    revisions = tuple(sorted(
        (Revision(r.revision_id, r.datetime, redirect) for r in revisions),
        key=lambda r: (r.datetime, r.revision_id)))
    return WikiExportDocument(title, revisions, redirect, snapshot)


def iter_wiki_export(stream: BinaryIO, snapshot: int | None = None) -> Iterator[WikiExportDocument]:
    """Yield one document per <page>, streaming.

    Pages that fail to convert are skipped with a warning; XML that does not
    parse raises MalformedExport.
    """
    try:
        for _, elem in ET.iterparse(stream, events=("end",)):
            if _local(elem.tag) != "page":
                continue
            try:
                yield _page_document(elem, snapshot)
            except (ValueError, MalformedDate) as exc:
                log.warning("skipping page: %s", exc)
            elem.clear()
    except ET.ParseError as exc:
        line, col = exc.position
        raise MalformedExport(f"invalid export XML: {exc}",
                              _byte_offset(stream, line, col)) from exc


def _byte_offset(stream: BinaryIO, line: int, col: int) -> int | None:
    try:
        stream.seek(0)
        lines = stream.read().split(b"\n")
    except (OSError, ValueError):
        return None
    return sum(len(l) + 1 for l in lines[:line - 1]) + col


def parse_wiki_export(data: bytes, snapshot: int | None = None) -> list[WikiExportDocument]:
    return list(iter_wiki_export(io.BytesIO(data), snapshot))


def serialize_wiki_export(documents: list[WikiExportDocument]) -> bytes:
    """Minimal export XML for the given documents (used for fixtures and caches)."""
    root = ET.Element("mediawiki", {"xmlns": "http://www.mediawiki.org/xml/export-0.10/"})
    for doc in documents:
        page = ET.SubElement(root, "page")
        ET.SubElement(page, "title").text = doc.page_title
        if doc.is_redirect:
            ET.SubElement(page, "redirect", {"title": ""})
        for r in doc.revisions:
            rev = ET.SubElement(page, "revision")
            ET.SubElement(rev, "id").text = str(r.revision_id)
            ET.SubElement(rev, "timestamp").text = format_iso8601(r.datetime)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)
