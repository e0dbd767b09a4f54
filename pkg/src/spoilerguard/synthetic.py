"""Random small wiki timelines for oracle checks and fixtures."""
from __future__ import annotations

import random
from pathlib import Path

from .ingest.dataset import Dataset, page_uri
from .ingest.episodes import serialize_episode_list
from .ingest.timemap import TimeMapDocument
from .ingest.wikiexport import WikiExportDocument
from .timeline import Event, EventSeries, Memento, PageTimeline, Revision


def random_series(rng: random.Random, base: int, width: int, max_episodes: int = 10) -> EventSeries:
    n = rng.randint(1, max_episodes)
    times = sorted(base + rng.randint(0, width) for _ in range(n))
    # pin the extremes so the zone really spans ``width`` seconds when n > 1
    if n > 1:
        times[0], times[-1] = base, base + width
    return EventSeries([Event("synthetic", 1, i + 1, f"S01E{i + 1:02d}", t)
                        for i, t in enumerate(times)])


def random_timeline(rng: random.Random, lo: int, hi: int, max_revisions: int = 20,
                    max_mementos: int = 10, title: str = "Page") -> PageTimeline:
    revisions = [Revision(i + 1, rng.randint(lo, hi)) for i in range(rng.randint(1, max_revisions))]
    mementos = [Memento(f"http://archive.test/web/{k}/{title}", rng.randint(lo, hi))
                for k in range(rng.randint(0, max_mementos))]
    return PageTimeline(title, f"http://wiki.test/wiki/{title}", tuple(revisions),
                        tuple(mementos), hi)


def random_instance(rng: random.Random, max_zone: int = 10**5, max_episodes: int = 10,
                    max_revisions: int = 20, max_mementos: int = 10,
                    title: str = "Page") -> tuple[EventSeries, PageTimeline]:
    base = rng.randint(10**9, 2 * 10**9)
    width = rng.randint(1, max_zone)
    series = random_series(rng, base, width, max_episodes)
    # revisions and mementos spill past both ends of the zone
    timeline = random_timeline(rng, base - width // 2, base + width + width // 2,
                               max_revisions, max_mementos, title)
    return series, timeline


def write_dataset(root: str | Path, seed: int = 0, pages: int = 5,
                  max_zone: int = 10**5) -> Dataset:
    """A dataset directory of random pages sharing one episode series."""
    rng = random.Random(seed)
    base = 1_300_000_000
    series = random_series(rng, base, max_zone, 10)
    wiki_uri = "http://synthetic.wiki.test"
    snapshot = base + 2 * max_zone
    ds = Dataset(Path(root), "synthetic", wiki_uri, snapshot, [])
    for p in range(pages):
        title = f"Page {p:03d}"
        t = random_timeline(rng, base - max_zone // 2, base + max_zone + max_zone // 2,
                            title=title)
        doc = WikiExportDocument(title, t.revisions, False, snapshot)
        uri_r = page_uri(wiki_uri, title)
        tm = None
        if t.mementos:
            tm = TimeMapDocument(uri_r, mementos=tuple((m.uri_m, m.datetime) for m in t.mementos))
        ds.add_page(doc, uri_r, tm)
    ds.save()
    (Path(root) / "episodes.csv").write_bytes(serialize_episode_list(series))
    return ds
