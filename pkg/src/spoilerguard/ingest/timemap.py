"""Link-format TimeMaps (RFC 7089 section 5)."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from ..timeline import MalformedDate, format_http_date, parse_http_date

log = logging.getLogger(__name__)

_LINK = re.compile(r'\s*<([^>]*)>((?:\s*;\s*[A-Za-z][\w\-]*\s*=\s*(?:"[^"]*"|[^;,\s]*))*)\s*(?:,|$)')
_PARAM = re.compile(r';\s*([A-Za-z][\w\-]*)\s*=\s*(?:"([^"]*)"|([^;,\s]*))')


class MalformedTimeMap(ValueError):
    pass


@dataclass(frozen=True)
class TimeMapDocument:
    uri_r: str
    uri_t: str = ""
    uri_g: str = ""
    mementos: tuple[tuple[str, int], ...] = field(default_factory=tuple)


def parse_links(text: str) -> list[tuple[str, dict[str, str]]]:
    links = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _LINK.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedTimeMap(f"unparseable link at offset {pos}")
        params = {}
        for p in _PARAM.finditer(m.group(2)):
            params[p.group(1).lower()] = p.group(2) if p.group(2) is not None else p.group(3)
        links.append((m.group(1).strip(), params))
        pos = m.end()
    return links


def parse_timemap(data: bytes) -> TimeMapDocument:
    """Parse a link-format TimeMap body.

    Mementos with unparseable datetimes are dropped with a warning.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedTimeMap("TimeMap is not UTF-8") from exc
    links = parse_links(text)
    if not links:
        raise MalformedTimeMap("empty TimeMap")
    uri_r = uri_t = uri_g = ""
    mementos = []
    for uri, params in links:
        rels = params.get("rel", "").split()
        if "original" in rels:
            uri_r = uri
        if "self" in rels:
            uri_t = uri
        if "timegate" in rels:
            uri_g = uri
        if "memento" in rels:
            try:
                mementos.append((uri, parse_http_date(params.get("datetime", ""))))
            except MalformedDate:
                log.warning("dropping memento %s with bad datetime %r",
                            uri, params.get("datetime"))
    if not uri_r:
        raise MalformedTimeMap('no rel="original" link')
    mementos.sort(key=lambda m: (m[1], m[0]))
    return TimeMapDocument(uri_r, uri_t, uri_g, tuple(mementos))


def serialize_timemap(doc: TimeMapDocument) -> bytes:
    lines = [f'<{doc.uri_r}>; rel="original"']
    if doc.uri_g:
        lines.append(f'<{doc.uri_g}>; rel="timegate"')
    if doc.uri_t:
        extra = ""
        if doc.mementos:
            extra = '; from="%s"; until="%s"' % (format_http_date(doc.mementos[0][1]),
                                                 format_http_date(doc.mementos[-1][1]))
        lines.append(f'<{doc.uri_t}>; rel="self"; type="application/link-format"{extra}')
    last = len(doc.mementos) - 1
    for i, (uri, dt) in enumerate(doc.mementos):
        rel = "memento"
        if i == 0 and i == last:
            rel = "first last memento"
        elif i == 0:
            rel = "first memento"
        elif i == last:
            rel = "last memento"
        lines.append(f'<{uri}>; rel="{rel}"; datetime="{format_http_date(dt)}"')
    return (",\n".join(lines) + "\n").encode("utf-8")
