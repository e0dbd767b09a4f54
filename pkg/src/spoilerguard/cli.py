"""``spoilerguard`` command line: ingest, analyze, serve, audit, oracle."""
from __future__ import annotations

import argparse
import logging
import os
import random
import sys
import time
from pathlib import Path

from .analysis import (DEFAULT_ORACLE_CAP, NoCapturedMemento, ZoneTooLarge, analyze_wiki,
                       brute_force_spoiler_seconds, spoiler_areas, union_measure)
from .audit import ExportRevisionSource, MappingRevisionSource, audit_log_file, format_summary
from .heuristics import HeuristicKind
from .ingest.dataset import DEFAULT_TIMEMAP_BASE, Dataset, ingest
from .ingest.episodes import parse_episode_list, serialize_episode_list
from .ingest.fetch import Fetcher
from .report import aggregate, emit_plot_data, write_reports
from .synthetic import random_instance
from .timegate import RevisionStore, TimeGateApp, make_server
from .timeline import EventSeries, parse_iso8601

log = logging.getLogger("spoilerguard")

CACHE_ENV = "SPOILERGUARD_CACHE"


class CommandError(Exception):
    pass


def _fetcher(args) -> Fetcher:
    return Fetcher(rate=args.rate, retries=args.retries, cache_dir=os.environ.get(CACHE_ENV))


def _read_source(source: str, args) -> bytes:
    if source.startswith(("http://", "https://")):
        return _fetcher(args).fetch(source)
    return Path(source).read_bytes()


def _episodes(args) -> EventSeries:
    path = Path(args.episodes) if args.episodes else Path(args.dataset) / "episodes.csv"
    if not path.exists():
        raise CommandError(f"episode list not found: {path}")
    return parse_episode_list(path.read_bytes())


def cmd_ingest(args) -> int:
    export = _read_source(args.export, args)
    snapshot = parse_iso8601(args.snapshot) if args.snapshot else int(time.time())
    timemaps = None
    if args.timemap_dir:
        timemaps = {}
        for f in sorted(Path(args.timemap_dir).glob("*.link")):
            timemaps[f.stem.replace("_", " ")] = f.read_bytes()
    ds = ingest(export, args.dataset, args.wiki_id, args.wiki_uri, snapshot,
                fetcher=None if timemaps is not None else _fetcher(args),
                timemap_base=args.timemap_base, timemaps=timemaps)
    if args.episodes:
        series = parse_episode_list(_read_source(args.episodes, args))
        (Path(args.dataset) / "episodes.csv").write_bytes(serialize_episode_list(series))
    archived = sum(1 for p in ds.pages if p["timemap"])
    print(f"ingested {len(ds.pages)} pages ({ds.redirects_removed} redirects removed, "
          f"{archived} archived) into {args.dataset}")
    return 0


def cmd_analyze(args) -> int:
    ds = Dataset.load(args.dataset)
    series = _episodes(args)
    timelines = ds.timelines()
    reports = analyze_wiki(series, timelines, workers=args.workers)
    if not reports:
        raise CommandError("dataset has no pages")
    agg = aggregate(reports, ds.wiki_id)
    out = Path(args.out)
    write_reports(reports, agg, out)
    emit_plot_data(reports, timelines, series, out)
    p = agg.probability
    print(f"{len(reports)} pages, {agg.unarchived_count} unarchived "
          f"({agg.unavailability:.1%}); mean spoiler probability "
          + ("n/a" if p.mean is None else f"{p.mean:.4f}"))
    return 0


def _listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected [host]:port, got {value!r}")
    return host or "0.0.0.0", int(port)


def build_app(dataset: str, heuristic: str, base_url: str, oldid: bool = False) -> TimeGateApp:
    ds = Dataset.load(dataset)
    store = RevisionStore.from_timelines(base_url, ds.timelines(), oldid_style=oldid)
    return TimeGateApp(store, HeuristicKind(heuristic))


def cmd_serve(args) -> int:
    host, port = args.listen
    base_url = args.base_url or f"http://{'localhost' if host == '0.0.0.0' else host}:{port}"
    app = build_app(args.dataset, args.heuristic, base_url, args.oldid)
    server = make_server(app, host, port)
    print(f"TimeGate serving {len(app.store)} resources on {host}:{server.server_port} "
          f"(default heuristic {app.default_heuristic.value})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_audit(args) -> int:
    if args.dataset:
        ds = Dataset.load(args.dataset)
        source = MappingRevisionSource((t.uri_r, t.revisions) for t in ds.timelines())
    else:
        source = ExportRevisionSource(_fetcher(args))
    records = open(args.records, "w", encoding="utf-8", newline="") if args.records else None
    try:
        for path in args.logs:
            summary = audit_log_file(path, source, records=records)
            print(f"# {path}")
            print(format_summary(summary), end="")
    finally:
        if records:
            records.close()
    return 0


def cmd_oracle(args) -> int:
    if args.synthetic:
        rng = random.Random(args.seed)
        cases = [random_instance(rng, title=f"case {i}") for i in range(args.synthetic)]
    else:
        ds = Dataset.load(args.dataset)
        series = _episodes(args)
        cases = [(series, t) for t in ds.timelines()]
    mismatches = checked = skipped = 0
    for series, timeline in cases:
        try:
            expected = brute_force_spoiler_seconds(series, timeline, cap=args.cap)
        except ZoneTooLarge:
            skipped += 1
            continue
        try:
            got = union_measure((a.start, a.end) for a in spoiler_areas(series, timeline))
        except NoCapturedMemento:
            got = 0
        checked += 1
        if got != expected:
            mismatches += 1
            print(f"MISMATCH {timeline.page_title}: analytic {got} != brute-force {expected}")
    print(f"checked {checked} timelines, skipped {skipped} over the zone cap")
    if mismatches:
        print(f"analytic == brute-force: FAILED ({mismatches} mismatches)")
        return 1
    print("analytic == brute-force: OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spoilerguard", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def fetch_opts(p):
        p.add_argument("--rate", type=float, default=1.0, help="requests per second per host")
        p.add_argument("--retries", type=int, default=3)

    p = sub.add_parser("ingest", help="parse an export and TimeMaps into a dataset directory")
    p.add_argument("--export", required=True, help="MediaWiki XML export (path or URL)")
    p.add_argument("--wiki-uri", required=True)
    p.add_argument("--wiki-id", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--snapshot", help="ISO-8601 time the export was taken (default: now)")
    p.add_argument("--episodes", help="episode list CSV to copy into the dataset")
    p.add_argument("--timemap-dir", help="read <Title>.link files instead of fetching")
    p.add_argument("--timemap-base", default=DEFAULT_TIMEMAP_BASE)
    fetch_opts(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="spoiler areas and probabilities for a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--episodes", help="episode list CSV (default: dataset/episodes.csv)")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the TimeGate service over a dataset")
    p.add_argument("--dataset", default=os.environ.get("SPOILERGUARD_DATASET"))
    p.add_argument("--listen", type=_listen,
                   default=_listen(os.environ.get("SPOILERGUARD_LISTEN", ":8080")))
    p.add_argument("--heuristic", choices=[h.value for h in HeuristicKind],
                   default=os.environ.get("SPOILERGUARD_HEURISTIC", HeuristicKind.MINPAST.value))
    p.add_argument("--base-url", default=os.environ.get("SPOILERGUARD_BASE_URL"))
    p.add_argument("--oldid", action="store_true", help="emit ?oldid= style URI-Ms")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("audit", help="classify access-log requests as spoiler/safe/indeterminate")
    p.add_argument("logs", nargs="+")
    p.add_argument("--dataset", help="resolve revisions from a dataset instead of the live wiki")
    p.add_argument("--records", help="write one CSV record per classified request")
    fetch_opts(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("oracle", help="check analytic spoiler areas against brute force")
    p.add_argument("--dataset")
    p.add_argument("--episodes")
    p.add_argument("--synthetic", type=int, default=0, metavar="N",
                   help="check N random instances instead of a dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_ORACLE_CAP)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("serve",) and not args.dataset:
        parser.print_usage(sys.stderr)
        print("spoilerguard: error: --dataset is required", file=sys.stderr)
        return 2
    if args.command == "oracle" and not (args.dataset or args.synthetic):
        parser.print_usage(sys.stderr)
        print("spoilerguard: error: oracle needs --dataset or --synthetic", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CommandError, OSError, ValueError, LookupError) as exc:
        print(f"spoilerguard: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
