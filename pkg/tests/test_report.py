import math

import pytest
from hypothesis import given, strategies as st

from spoilerguard.analysis import PageStatus, SpoilerReport, analyze_wiki
from spoilerguard.report import (EmptyInput, PlotKind, aggregate, emit_plot_data,
                                 empirical_cdf, histogram, plot_series, write_reports)

from .builders import series, timeline

DAY = 86400


def report(p, title="p", status=PageStatus.ARCHIVED, revisions=10, mementos=2, days=10):
    return SpoilerReport(title, status, probability=p, revision_count=revisions,
                         memento_count=mementos, first_revision=0, snapshot_datetime=days * DAY)


class TestAggregate:
    def test_mean_and_stddev(self):
        agg = aggregate([report(0.5, "a"), report(0.7, "b")])
        assert agg.probability.mean == pytest.approx(0.6)
        # sample stddev of {0.5, 0.7}: sqrt(((-0.1)^2 + 0.1^2) / 1)
        assert agg.probability.std_dev == pytest.approx(math.sqrt(0.02))
        assert agg.probability.std_dev == pytest.approx(0.1414, abs=1e-4)
        assert agg.probability.rel_err == pytest.approx(math.sqrt(0.02) / math.sqrt(2) / 0.6)

    def test_single_page(self):
        agg = aggregate([report(0.5)])
        assert agg.probability.mean == 0.5
        assert agg.probability.std_dev is None and agg.probability.rel_err is None

    def test_rates_per_day(self):
        agg = aggregate([report(0.1, revisions=20, mementos=5, days=10)])
        assert agg.revisions_per_day.mean == 2.0
        assert agg.mementos_per_day.mean == 0.5

    def test_unarchived(self):
        reports = [report(0.0, "a", PageStatus.UNARCHIVED), report(0.4, "b")]
        agg = aggregate(reports, "wiki")
        assert (agg.page_count, agg.unarchived_count, agg.unavailability) == (2, 1, 0.5)
        assert agg.probability.mean == 0.4

    def test_all_unarchived(self):
        agg = aggregate([report(0.0, "a", PageStatus.UNARCHIVED)])
        assert agg.unavailability == 1.0 and agg.probability.mean is None

    def test_empty(self):
        with pytest.raises(EmptyInput):
            aggregate([])

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=12), st.randoms())
    def test_permutation_invariant(self, probs, rnd):
        reports = [report(p, f"p{i}", days=i + 1) for i, p in enumerate(probs)]
        shuffled = reports[:]
        rnd.shuffle(shuffled)
        assert aggregate(shuffled) == aggregate(reports)


class TestPlots:
    def test_cdf(self):
        assert empirical_cdf([0, 1]) == [(0, 0.5), (1, 1.0)]
        assert empirical_cdf([0.2, 0.2, 0.4, 0.9]) == [(0.2, 0.5), (0.4, 0.75), (0.9, 1.0)]

    def test_histogram_bins(self):
        counts = histogram([0.0, 0.05, 0.5, 0.99, 1.0])
        assert len(counts) == 20
        assert counts[0] == 1 and counts[1] == 1 and counts[10] == 1 and counts[19] == 2

    @given(st.lists(st.floats(0, 1), max_size=40))
    def test_histogram_and_cdf_properties(self, probs):
        assert sum(histogram(probs)) == len(probs)
        cdf = empirical_cdf(probs)
        assert all(a[0] < b[0] and a[1] < b[1] for a, b in zip(cdf, cdf[1:]))
        if probs:
            assert cdf[-1][1] == 1.0

    def test_one_area_timeline(self):
        s = series(1000, 2000, 3000)
        t = timeline([2500], [2600], title="A")
        reports = analyze_wiki(s, [t])
        rows = plot_series(reports, [t], s)[PlotKind.AREA_TIMELINE].rows
        kinds = [r[3] for r in rows]
        assert kinds.count("pre-archive") == 1
        assert kinds.count("event") == 3 and kinds.count("revision") == 1 and kinds.count("memento") == 1
        assert [r[0] for r in rows] == sorted(r[0] for r in rows)
        assert [1000, 2000, "A", "pre-archive", "e2"] in rows

    def test_missed_and_redundant_per_day(self):
        t = timeline([0, 10, DAY + 5], [20, 30, 40], title="A")
        ps = plot_series([], [t], series(0))
        assert ps[PlotKind.MISSED_UPDATES].rows == [["1970-01-01", "A", 1], ["1970-01-02", "A", 1]]
        assert ps[PlotKind.REDUNDANT_MEMENTOS].rows == [["1970-01-01", "A", 2]]

    def test_empty_reports_write_headers(self, tmp_path):
        paths = emit_plot_data([], [], series(0), tmp_path)
        assert len(paths) == 5
        for p in paths:
            text = p.read_text()
            if p.name != "plot_histogram.csv" and p.name != "plot_area_timeline.csv":
                assert text.count("\n") == 1

    def test_write_reports(self, tmp_path):
        s = series(1000, 2000, 3000)
        reports = analyze_wiki(s, [timeline([2500], [2600], title="A"), timeline([5], [], title="B")])
        write_reports(reports, aggregate(reports, "w"), tmp_path)
        lines = (tmp_path / "reports.csv").read_text().splitlines()
        assert lines[1] == "A,archived,0.500000,1000,2000,1,1,0,1,1,0,0"
        assert lines[2].startswith("B,unarchived,")
        agg = (tmp_path / "aggregate.csv").read_text().splitlines()
        assert agg[1].startswith("w,2,1,0.500000,0.500000,n/a,n/a")
        assert (tmp_path / "areas.csv").read_text().splitlines()[1] == \
            "A,pre-archive,1970-01-01T00:16:40Z,1970-01-01T00:33:20Z,1000,2000,e2"
