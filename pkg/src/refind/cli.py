"""Command-line frontend.

Subcommands are thin delegations to the library modules; no matching or
ranking logic lives here.  Plain-text output by default, ``--format json``
for scripting.  The ``REFIND_ARCHIVE`` environment variable supplies a
default archive path and ``REFIND_CORPUS`` an alternative coded corpus for
the stats endpoints.

Exit codes: 0 success, 1 user error (bad flags, bad input, missing things),
2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import corpusstats, service
from .annotations import AnnotationStore
from .archive import Archive, _ts_to_str
from .dialog import DialogState, handle_utterance, start_session
from .errors import MalformedInputError, RefindError
from .extractor import NuggetKind, extract_nuggets, supported_kinds
from .index import build_index, query_pages, query_nuggets, save_index, vocabulary
from .voicegen import write_voice_documents

KIND_CHOICES = [k.value for k in supported_kinds()]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _archive_path(args) -> Path:
    path = args.archive or os.environ.get("REFIND_ARCHIVE")
    if not path:
        raise MalformedInputError(
            "no archive given (pass a path or set REFIND_ARCHIVE)"
        )
    return Path(path)


def _open_stores(args) -> tuple[Archive, AnnotationStore]:
    archive = Archive(_archive_path(args))
    return archive, AnnotationStore(archive)


def _build_index(archive: Archive):
    nuggets = [n for s in archive.snapshots() for n in extract_nuggets(s)]
    return build_index(archive, nuggets)


def _emit(args, payload, text: str) -> None:
    if getattr(args, "format", "text") == "json":
        print(json.dumps(payload, ensure_ascii=False, indent=1))
    elif text:
        print(text)


# -- subcommands ---------------------------------------------------------------

def _cmd_ingest(args) -> int:
    archive = Archive(_archive_path(args))
    html = Path(args.file).read_bytes()
    snapshot = archive.ingest_page(args.url, html, datetime.now(timezone.utc))
    _emit(args, service.snapshot_to_dict(snapshot), snapshot.page_id)
    return 0


def _cmd_history(args) -> int:
    archive = Archive(_archive_path(args))
    visits = archive.list_history()
    lines = []
    for v in visits:
        url = archive.get_snapshot(v.page_id).url
        lines.append(f"{_ts_to_str(v.visited_at)}\t{v.visit_id}\t{v.page_id}\t{url}")
    _emit(args, {"visits": [service.visit_to_dict(v) for v in visits]}, "\n".join(lines))
    return 0


def _cmd_extract(args) -> int:
    archive = Archive(_archive_path(args))
    kinds = {NuggetKind(args.kind)} if args.kind else None
    found = [n for s in archive.snapshots() for n in extract_nuggets(s, kinds)]
    lines = [
        f"{n.page_id}\t{n.kind.value}\t{n.span.start}:{n.span.end}\t{n.normalized}"
        for n in found
    ]
    payload = {
        "nuggets": [
            {
                "nugget_id": n.nugget_id,
                "page_id": n.page_id,
                "kind": n.kind.value,
                "span": [n.span.start, n.span.end],
                "raw": n.raw,
                "normalized": n.normalized,
            }
            for n in found
        ]
    }
    _emit(args, payload, "\n".join(lines))
    return 0


def _cmd_index(args) -> int:
    archive = Archive(_archive_path(args))
    index = _build_index(archive)
    path = save_index(index, archive.path)
    summary = {
        "pages": index.page_count(),
        "terms": len(vocabulary(index)),
        "cache": str(path),
    }
    _emit(args, summary, f"indexed {summary['pages']} pages, {summary['terms']} terms -> {path}")
    return 0


def _cmd_query(args) -> int:
    archive = Archive(_archive_path(args))
    index = _build_index(archive)
    keywords = args.keywords.split()
    if args.kind:
        matches = query_nuggets(index, keywords, NuggetKind(args.kind))
        lines = [f"{m.page_id}\t{m.kind.value}\t{m.normalized}" for m in matches]
        payload = {"matches": [service.nugget_match_to_dict(m) for m in matches]}
    else:
        matches = query_pages(index, keywords)
        lines = [f"{m.page_id}\t{m.score}" for m in matches]
        payload = {"matches": [service.page_match_to_dict(m) for m in matches]}
    _emit(args, payload, "\n".join(lines))
    return 0


def _parse_span(text: str) -> tuple[int, int]:
    start, sep, end = text.partition(":")
    if not sep or not start.isdigit() or not end.isdigit():
        raise MalformedInputError(f"span must look like START:END, got {text!r}")
    return int(start), int(end)


def _cmd_annotate(args) -> int:
    _, store = _open_stores(args)
    if args.region is not None:
        anchor: tuple[int, int] | str = args.region
    elif args.span is not None:
        anchor = _parse_span(args.span)
    else:
        raise MalformedInputError("pass --span A:B (highlight/note) or --region LABEL (drawing)")
    note = store.add_annotation(
        page_id=args.page_id,
        kind=args.kind,
        anchor=anchor,
        body=args.body,
        category=args.category,
    )
    _emit(args, service.annotation_to_dict(note), note.annotation_id)
    return 0


def _annotation_line(note) -> str:
    snippet = note.body if note.body is not None else note.quoted
    return (
        f"{note.annotation_id}\t{note.kind.value}\t{note.page_id}\t"
        f"{note.category or '-'}\t{snippet}"
    )


def _cmd_annotations(args) -> int:
    _, store = _open_stores(args)
    if args.site:
        grouped = store.list_by_site()
        lines = []
        for host in sorted(grouped):
            lines.append(f"{host}:")
            lines.extend(f"  {_annotation_line(n)}" for n in grouped[host])
        payload = {
            "by_site": {
                host: [service.annotation_to_dict(n) for n in notes]
                for host, notes in grouped.items()
            }
        }
        _emit(args, payload, "\n".join(lines))
        return 0
    if args.q is not None:
        notes = store.search_annotations(args.q.split())
    elif args.category is not None:
        notes = store.list_by_category(args.category or None)
    else:
        notes = store.all_annotations()
    payload = {"annotations": [service.annotation_to_dict(n) for n in notes]}
    _emit(args, payload, "\n".join(_annotation_line(n) for n in notes))
    return 0


def _cmd_dialog(args) -> int:
    archive, store = _open_stores(args)
    index = _build_index(archive)
    session, prompt = start_session(index, store)
    print(f"S: {prompt}")
    for line in sys.stdin:
        line = line.rstrip("\n")
        if line.strip() == "/quit":
            break
        print(f"U: {line}")
        prompt, _ = handle_utterance(session, line)
        print(f"S: {prompt}")
        if session.state is DialogState.DONE:
            break
    return 0


def _cmd_export_vxml(args) -> int:
    archive = Archive(_archive_path(args))
    index = _build_index(archive)
    written = write_voice_documents(index, args.outdir)
    for path in written:
        print(path)
    return 0


def _cmd_stats(args) -> int:
    corpus = corpusstats.load_coded_corpus(args.corpus)
    waypoints = corpusstats.tally_waypoints(corpus)
    annotations = corpusstats.tally_annotations(corpus)
    summary = corpusstats.conversation_summary(corpus)
    payload = {
        "waypoints": corpusstats.usage_table_to_dict(waypoints),
        "annotations": corpusstats.usage_table_to_dict(annotations),
        "summary": corpusstats.summary_to_dict(summary),
    }
    text = "\n".join(
        [
            corpusstats.render_usage_table(waypoints, "Waypoint usage by type"),
            corpusstats.render_usage_table(annotations, "Annotation usage by type"),
            corpusstats.render_summary(summary),
        ]
    )
    _emit(args, payload, text)
    return 0


def _cmd_serve(args) -> int:
    corpus = os.environ.get("REFIND_CORPUS")
    svc = service.serve(_archive_path(args), bind=args.bind, corpus_path=corpus)
    print(f"serving {_archive_path(args)} on http://{svc.address}", flush=True)
    svc.serve_forever()
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="refind", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    def add_archive(p, with_format=True):
        p.add_argument("archive", nargs="?", default=None,
                       help="archive directory (default: $REFIND_ARCHIVE)")
        if with_format:
            p.add_argument("--format", choices=["text", "json"], default="text")

    p = add("ingest", _cmd_ingest, help="store a page and record the visit")
    add_archive(p)
    p.add_argument("url")
    p.add_argument("file", help="file holding the raw markup")

    p = add("history", _cmd_history, help="print the visit log in time order")
    add_archive(p)

    p = add("extract", _cmd_extract, help="extract fact nuggets from archived pages")
    add_archive(p)
    p.add_argument("--kind", choices=KIND_CHOICES)

    p = add("index", _cmd_index, help="build the search index and write the cache")
    add_archive(p)

    p = add("query", _cmd_query, help="search pages (or nuggets with --kind)")
    add_archive(p)
    p.add_argument("--keywords", required=True)
    p.add_argument("--kind", choices=KIND_CHOICES)

    p = add("annotate", _cmd_annotate, help="attach a highlight, note, or drawing")
    add_archive(p)
    p.add_argument("page_id")
    p.add_argument("--kind", required=True, choices=["Highlight", "Note", "Drawing"])
    p.add_argument("--span", help="character span START:END (highlight/note)")
    p.add_argument("--region", help="region label (drawing)")
    p.add_argument("--body")
    p.add_argument("--category")

    p = add("annotations", _cmd_annotations, help="list annotations")
    add_archive(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--site", action="store_true", help="group by web site")
    group.add_argument("--category", help="filter by category ('' = uncategorized)")
    group.add_argument("--q", help="keyword search over bodies and anchored text")

    p = add("dialog", _cmd_dialog, help="interactive re-finding dialog (/quit exits)")
    add_archive(p, with_format=False)

    p = add("export-vxml", _cmd_export_vxml, help="emit voice dialog and grammar files")
    add_archive(p, with_format=False)
    p.add_argument("outdir")

    p = add("stats", _cmd_stats, help="usage tables over a coded conversation corpus")
    p.add_argument("corpus", help="coded corpus JSON file")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = add("serve", _cmd_serve, help="run the HTTP service over an archive")
    add_archive(p, with_format=False)
    p.add_argument("--bind", default="127.0.0.1:8080")

    return parser


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError:
        return 1
    try:
        return args.func(args)
    except _UsageError:
        return 1
    except RefindError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 0
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
