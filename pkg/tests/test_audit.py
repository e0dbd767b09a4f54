import calendar
import gzip
import io
import tracemalloc
from collections import Counter
from pathlib import Path

import pytest

from spoilerguard.audit import (Category, ExportRevisionSource, LogEntry,
                                MalformedLogLine, MappingRevisionSource, RequestFilter,
                                audit_lines, audit_log_file, classify, extract_archive_datetime,
                                filter_requests, format_summary, parse_log_line)
from spoilerguard.ingest import Fetcher, parse_wiki_export, serialize_wiki_export
from spoilerguard.timeline import Revision

FIXTURES = Path(__file__).parent / "fixtures"
WIKI = "http://lostpedia.wikia.com/wiki/"


@pytest.fixture
def source():
    docs = parse_wiki_export((FIXTURES / "lostpedia_export.xml").read_bytes())
    return MappingRevisionSource((WIKI + d.page_title.replace(" ", "_"), d.revisions) for d in docs)


def stamp(s):
    return calendar.timegm((int(s[:4]), int(s[4:6]), int(s[6:8]), int(s[8:10]),
                            int(s[10:12]), int(s[12:14]), 0, 0, 0))


class TestParseLine:
    def test_full_line(self):
        line = ('anon01 - - [15/Feb/2011:10:00:00 +0000] "GET /web/20110215000000/http://x.test/p HTTP/1.1" '
                '200 5120 "http://web.archive.org/web/20110120000000/http://x.test/" "Mozilla/5.0"\n')
        e = parse_log_line(line)
        assert e.visitor_id == "anon01"
        assert e.visited_uri == "/web/20110215000000/http://x.test/p"
        assert e.referrer_uri == "http://web.archive.org/web/20110120000000/http://x.test/"
        assert e.raw_line == line.rstrip("\n")

    def test_missing_referrer(self):
        e = parse_log_line('a - - [15/Feb/2011:10:00:00 +0000] "GET /x HTTP/1.0" 200 - "-" "-"')
        assert e.referrer_uri == ""

    def test_common_format_without_referrer(self):
        assert parse_log_line('a - - [15/Feb/2011:10:00:00 +0000] "GET /x HTTP/1.0" 404 12').referrer_uri == ""

    @pytest.mark.parametrize("line", ["garbage", "", 'a - - [x] "GET" 200 1 "-" "-"'])
    def test_garbage(self, line):
        with pytest.raises(MalformedLogLine):
            parse_log_line(line)


class TestArchiveDatetime:
    def test_epoch_offset(self):
        assert extract_archive_datetime("/web/19700101000140/http://x.test/p") == (100, "http://x.test/p")

    def test_modifier_stripped(self):
        got = extract_archive_datetime("/web/20110215123456im_/http://x.test/a.png")
        assert got == (stamp("20110215123456"), "http://x.test/a.png")
        assert got[0] == 1297773296

    def test_full_uri(self):
        got = extract_archive_datetime("http://web.archive.org/web/20110120000000/http://x.test/")
        assert got == (stamp("20110120000000"), "http://x.test/")

    @pytest.mark.parametrize("uri", ["/about", "", "/web/2011/http://x", "/web/20111399000000/http://x"])
    def test_not_archive(self, uri):
        assert extract_archive_datetime(uri) is None


def entry(target):
    return LogEntry("v", f"/web/20110101000000/{target}", "", "")


class TestFilter:
    @pytest.mark.parametrize("target, kept", [
        ("http://lostpedia.wikia.com/wiki/Template:Infobox", False),
        ("http://lostpedia.wikia.com/wiki/Category:Characters", False),
        ("http://lostpedia.wikia.com/wiki/Special:Search", False),
        ("http://lostpedia.wikia.com/wiki/User_talk:Someone", False),
        ("http://lostpedia.wikia.com/wiki/Kate_Austen", True),
        ("http://lostpedia.wikia.com/skins/style.css", False),
        ("http://lostpedia.wikia.com/images/a/b/Kate.JPG", False),
        ("http://lostpedia.wikia.com/wiki/Kate_Austen?x=script.js", True),
        ("http://ad.doubleclick.net/adj/wikia", False),
        ("http://lostpedia.wikia.com/wiki/Dr._Arzt", True),
    ])
    def test_defaults(self, target, kept):
        assert RequestFilter().keep(entry(target)) is kept

    def test_idempotent(self):
        lines = (FIXTURES / "wayback.log").read_text().splitlines()
        entries = [parse_log_line(l) for l in lines] + [entry(WIKI + "Template:X")]
        once = filter_requests(entries)
        assert filter_requests(once) == once
        assert len(once) == 10

    def test_configurable(self):
        f = RequestFilter(namespaces=("Episode",))
        assert not f.keep(entry(WIKI + "Episode:Pilot"))
        assert f.keep(entry(WIKI + "Template:X"))


def reference_category(entry, pages):
    """Straight-line restatement of the classification rule."""
    visited = extract_archive_datetime(entry.visited_uri)
    referred = extract_archive_datetime(entry.referrer_uri) if entry.referrer_uri else None
    if visited is None or referred is None:
        return Category.INDETERMINATE
    title = visited[1].rsplit("/wiki/", 1)[-1]
    if title not in pages:
        return Category.INDETERMINATE
    t_r = None
    for r in pages[title]:
        if r.datetime <= visited[0] and (t_r is None or r.datetime > t_r):
            t_r = r.datetime
    if t_r is None:
        return Category.INDETERMINATE
    return Category.SPOILER if referred[0] < t_r else Category.SAFE


class TestClassify:
    def test_spoiler(self):
        src = lambda target: [Revision(1, 1500)]
        e = LogEntry("v", "/web/19700101003000/http://w.test/wiki/A",
                     "/web/19700101001640/http://w.test/wiki/B", "")
        c = classify(e, src)
        assert (c.category, c.desired, c.revision) == (Category.SPOILER, 1000, 1500)

    def test_boundary_is_safe(self):
        src = lambda target: [Revision(1, 1500)]
        e = LogEntry("v", "/web/19700101003000/http://w.test/wiki/A",
                     "/web/19700101002500/http://w.test/wiki/B", "")
        assert classify(e, src).category is Category.SAFE

    def test_export_unavailable(self):
        def src(target):
            raise LookupError("503")
        e = LogEntry("v", "/web/19700101003000/http://w.test/wiki/A",
                     "/web/19700101002500/http://w.test/wiki/B", "")
        c = classify(e, src)
        assert c.category is Category.INDETERMINATE and "export unavailable" in c.reason

    def test_fixture_matches_reference(self, source):
        docs = parse_wiki_export((FIXTURES / "lostpedia_export.xml").read_bytes())
        pages = {d.page_title.replace(" ", "_"): d.revisions for d in docs}
        for line in (FIXTURES / "wayback.log").read_text().splitlines():
            e = parse_log_line(line)
            assert classify(e, source).category is reference_category(e, pages)


class TestAuditFile:
    def test_fixture(self, source, tmp_path):
        records = io.StringIO()
        summary = audit_log_file(FIXTURES / "wayback.log", source, records=records)
        assert summary.counts == Counter({Category.SAFE: 6, Category.SPOILER: 2, Category.INDETERMINATE: 2})
        assert summary.spoiler_rate == 0.25
        assert summary.spoiler_rate_all == 0.2
        rows = records.getvalue().splitlines()
        assert rows[0] == "visitor_id,classification,t_a,t_m,t_r,t_a_source,reason"
        assert rows[1].startswith("anon01,spoiler,2011-01-20T00:00:00Z,2011-02-15T00:00:00Z,2011-02-01T00:00:00Z,referrer,")
        assert len(rows) == 11

    def test_gzip(self, source, tmp_path):
        path = tmp_path / "log.gz"
        path.write_bytes(gzip.compress((FIXTURES / "wayback.log").read_bytes()))
        assert audit_log_file(path, source).spoiler_rate == 0.25

    def test_all_indeterminate(self, source):
        summary = audit_lines(['a - - [x] "GET /web/20110101000000/http://w.test/wiki/A HTTP/1.1" 200 1 "-" "-"'],
                              source)
        assert summary.spoiler_rate is None
        assert "spoiler_rate_determinate: n/a" in format_summary(summary)

    def test_malformed_counted(self, source):
        summary = audit_lines(["garbage", "", "more garbage"], source)
        assert summary.malformed == 2 and summary.total == 0

    def test_streaming_memory_is_bounded(self, source):
        line = (FIXTURES / "wayback.log").read_text().splitlines()[0] + "\n"

        def lines(n):
            for _ in range(n):
                yield line

        tracemalloc.start()
        audit_lines(lines(1_000), source)
        _, small = tracemalloc.get_traced_memory()
        tracemalloc.reset_peak()
        summary = audit_lines(lines(20_000), source)
        _, large = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert summary.counts[Category.SPOILER] == 20_000
        assert large < small + 256 * 1024


def test_export_revision_source_memoizes():
    xml = serialize_wiki_export(parse_wiki_export((FIXTURES / "lostpedia_export.xml").read_bytes())[:1])
    calls = []

    def transport(uri):
        calls.append(uri)
        return (200, xml) if "Kate_Austen" in uri else (503, b"")

    src = ExportRevisionSource(Fetcher(transport, rate=1000, retries=0, sleep=lambda s: None))
    assert len(src(WIKI + "Kate_Austen")) == 3
    assert len(src(WIKI + "Kate_Austen")) == 3
    assert calls == ["http://lostpedia.wikia.com/index.php?title=Special:Export"
                     "&pages=Kate_Austen&history=1&action=submit"]
    e = LogEntry("v", "/web/20110215000000/" + WIKI + "Jack", "/web/20110101000000/" + WIKI + "X", "")
    c = classify(e, src)
    assert c.category is Category.INDETERMINATE and "503" in c.reason
