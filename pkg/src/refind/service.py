"""JSON-over-HTTP service exposing archive, annotation, query, and dialog
session operations.

Endpoints delegate to the library modules; responses carry the same content
the library calls return.  Errors map to status classes: not-found 404,
malformed input 400, conflicts (including utterances to finished sessions)
409, always as ``{"error": {"code", "message"}}``.

One service process owns the archive directory (a pid lock file guards it);
writes are serialized internally.  Dialog sessions are held in memory with a
30-minute idle expiry, and each session processes one utterance at a time.
"""

from __future__ import annotations

import json
import logging
import os
import re
import signal
import threading
import uuid
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import corpusstats, dialog
from .annotations import Annotation, AnnotationStore, Category
from .archive import Archive, PageSnapshot, VisitEvent, _ts_from_str, _ts_to_str
from .errors import (
    ConflictError,
    MalformedInputError,
    NotFoundError,
    RefindError,
    SessionClosedError,
)
from .extractor import NuggetKind, extract_nuggets
from .index import NuggetMatch, PageMatch, build_index, query_nuggets, query_pages

LOGGER = logging.getLogger(__name__)

SESSION_IDLE_LIMIT = timedelta(minutes=30)
LOCK_FILE = ".service.lock"


# -- wire representations ----------------------------------------------------

def snapshot_to_dict(snapshot: PageSnapshot) -> dict:
    return {
        "page_id": snapshot.page_id,
        "url": snapshot.url,
        "title": snapshot.title,
        "fetched_at": _ts_to_str(snapshot.fetched_at),
        "text": snapshot.text,
        "description": snapshot.description,
        "html": snapshot.html.decode("utf-8", errors="replace"),
    }


def visit_to_dict(visit: VisitEvent) -> dict:
    return {
        "visit_id": visit.visit_id,
        "page_id": visit.page_id,
        "visited_at": _ts_to_str(visit.visited_at),
        "referrer_page_id": visit.referrer_page_id,
    }


def annotation_to_dict(note: Annotation) -> dict:
    return {
        "annotation_id": note.annotation_id,
        "page_id": note.page_id,
        "kind": note.kind.value,
        "span": [note.span.start, note.span.end] if note.span else None,
        "region": note.region,
        "quoted": note.quoted,
        "body": note.body,
        "category": note.category,
        "created_at": _ts_to_str(note.created_at),
        "stale": note.stale,
    }


def category_to_dict(category: Category) -> dict:
    return {"name": category.name, "builtin": category.builtin}


def page_match_to_dict(match: PageMatch) -> dict:
    return {
        "page_id": match.page_id,
        "score": match.score,
        "matched_tokens": sorted(match.matched_tokens),
    }


def nugget_match_to_dict(match: NuggetMatch) -> dict:
    return {
        "page_id": match.page_id,
        "nugget_id": match.nugget_id,
        "kind": match.kind.value,
        "normalized": match.normalized,
    }


# -- service state -----------------------------------------------------------

class _Session:
    def __init__(self, session: dialog.DialogSession):
        self.session = session
        self.lock = threading.Lock()
        self.expires_at = datetime.now(timezone.utc) + SESSION_IDLE_LIMIT

    def touch(self) -> None:
        self.expires_at = datetime.now(timezone.utc) + SESSION_IDLE_LIMIT


class ServiceState:
    """Shared state behind the request handlers."""

    def __init__(self, archive_path: str | Path, corpus_path: str | Path | None = None):
        self.archive = Archive(archive_path)
        self.annotations = AnnotationStore(self.archive)
        self.corpus_path = Path(corpus_path) if corpus_path else corpusstats.fixture_corpus_path()
        self.write_lock = threading.Lock()
        self.sessions: dict[str, _Session] = {}
        self.rebuild_index()

    def rebuild_index(self) -> None:
        nuggets = [
            nugget
            for snapshot in self.archive.snapshots()
            for nugget in extract_nuggets(snapshot)
        ]
        self.index = build_index(self.archive, nuggets)

    def open_session(self) -> tuple[str, str, datetime]:
        session, prompt = dialog.start_session(self.index, self.annotations)
        token = uuid.uuid4().hex
        holder = _Session(session)
        self.sessions[token] = holder
        return token, prompt, holder.expires_at

    def get_session(self, token: str) -> _Session:
        holder = self.sessions.get(token)
        if holder is None:
            raise NotFoundError(f"unknown session: {token!r}")
        if datetime.now(timezone.utc) > holder.expires_at:
            del self.sessions[token]
            raise NotFoundError(f"session expired: {token!r}")
        return holder

    def corpus(self) -> list[corpusstats.CodedConversation]:
        if not self.corpus_path.exists():
            raise NotFoundError(f"coded corpus not found: {self.corpus_path}")
        return corpusstats.load_coded_corpus(self.corpus_path)


_ERROR_STATUS = [
    (SessionClosedError, 409, "session-closed"),
    (ConflictError, 409, "conflict"),
    (NotFoundError, 404, "not-found"),
    (MalformedInputError, 400, "malformed-input"),
    (RefindError, 400, "malformed-input"),
]


def _error_payload(exc: RefindError) -> tuple[int, dict]:
    for cls, status, code in _ERROR_STATUS:
        if isinstance(exc, cls):
            return status, {"error": {"code": code, "message": str(exc)}}
    raise exc


def _parse_kind(value: str) -> NuggetKind:
    try:
        return NuggetKind(value)
    except ValueError:
        raise MalformedInputError(f"unknown nugget kind: {value!r}") from None


def _parse_ts(value: str, name: str) -> datetime:
    try:
        return _ts_from_str(value)
    except ValueError:
        raise MalformedInputError(
            f"{name} must look like 2026-01-31T12:00:00Z, got {value!r}"
        ) from None


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState  # injected by make_handler
    protocol_version = "HTTP/1.1"

    # -- plumbing --

    def log_message(self, fmt, *args):
        LOGGER.debug("%s - %s", self.address_string(), fmt % args)

    def _reply(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            parsed = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedInputError(f"request body is not valid JSON: {exc}") from None
        if not isinstance(parsed, dict):
            raise MalformedInputError("request body must be a JSON object")
        return parsed

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        query = {k: v[0] for k, v in parse_qs(parsed.query, keep_blank_values=True).items()}
        try:
            handler, args = self._route(method, parsed.path)
            if handler is None:
                self._reply(404, {"error": {"code": "not-found",
                                            "message": f"no route for {method} {parsed.path}"}})
                return
            status, payload = handler(*args, query)
            self._reply(status, payload)
        except RefindError as exc:
            self._reply(*_error_payload(exc))
        except Exception:  # internal error; do not leak a stack trace
            LOGGER.exception("unhandled error for %s %s", method, self.path)
            self._reply(500, {"error": {"code": "internal", "message": "internal error"}})

    _ROUTES = [
        ("POST", re.compile(r"/pages$"), "_post_pages"),
        ("GET", re.compile(r"/pages/([0-9a-f]+)$"), "_get_page"),
        ("GET", re.compile(r"/history$"), "_get_history"),
        ("POST", re.compile(r"/annotations$"), "_post_annotations"),
        ("GET", re.compile(r"/annotations$"), "_get_annotations"),
        ("POST", re.compile(r"/categories$"), "_post_categories"),
        ("GET", re.compile(r"/search$"), "_get_search"),
        ("POST", re.compile(r"/sessions$"), "_post_sessions"),
        ("POST", re.compile(r"/sessions/([0-9a-f]+)/utterances$"), "_post_utterance"),
        ("GET", re.compile(r"/sessions/([0-9a-f]+)/transcript$"), "_get_transcript"),
        ("GET", re.compile(r"/stats/waypoints$"), "_get_stats_waypoints"),
        ("GET", re.compile(r"/stats/annotations$"), "_get_stats_annotations"),
    ]

    def _route(self, method: str, path: str):
        for route_method, pattern, name in self._ROUTES:
            if route_method != method:
                continue
            match = pattern.fullmatch(path)
            if match:
                return getattr(self, name), match.groups()
        return None, ()

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    # -- endpoints --

    def _post_pages(self, query):
        body = self._body()
        url = body.get("url")
        html = body.get("html")
        if not isinstance(url, str) or not isinstance(html, str):
            raise MalformedInputError('body must carry string fields "url" and "html"')
        fetched_at = None
        if body.get("fetched_at") is not None:
            fetched_at = _parse_ts(body["fetched_at"], "fetched_at")
        with self.state.write_lock:
            snapshot = self.state.archive.ingest_page(
                url, html.encode("utf-8"), fetched_at, body.get("referrer")
            )
            self.state.rebuild_index()
        return 201, snapshot_to_dict(snapshot)

    def _get_page(self, page_id, query):
        return 200, snapshot_to_dict(self.state.archive.get_snapshot(page_id))

    def _get_history(self, query):
        start = _parse_ts(query["from"], "from") if query.get("from") else None
        end = _parse_ts(query["to"], "to") if query.get("to") else None
        visits = self.state.archive.list_history(start, end)
        return 200, {"visits": [visit_to_dict(v) for v in visits]}

    def _post_annotations(self, query):
        body = self._body()
        if "span" in body and body["span"] is not None:
            span = body["span"]
            if not (isinstance(span, list) and len(span) == 2
                    and all(isinstance(v, int) for v in span)):
                raise MalformedInputError('"span" must be a [start, end] integer pair')
            anchor = (span[0], span[1])
        elif body.get("region") is not None:
            anchor = body["region"]
        else:
            raise MalformedInputError('annotation needs a "span" or a "region" anchor')
        with self.state.write_lock:
            note = self.state.annotations.add_annotation(
                page_id=body.get("page_id", ""),
                kind=body.get("kind", ""),
                anchor=anchor,
                body=body.get("body"),
                category=body.get("category"),
            )
        return 201, annotation_to_dict(note)

    def _get_annotations(self, query):
        store = self.state.annotations
        if "q" in query:
            notes = store.search_annotations(query["q"].split())
        elif "site" in query:
            notes = store.list_by_site().get(query["site"], [])
        elif "category" in query:
            notes = store.list_by_category(query["category"] or None)
        else:
            notes = store.all_annotations()
        return 200, {"annotations": [annotation_to_dict(n) for n in notes]}

    def _post_categories(self, query):
        body = self._body()
        name = body.get("name")
        if not isinstance(name, str):
            raise MalformedInputError('body must carry a string field "name"')
        with self.state.write_lock:
            category = self.state.annotations.create_category(name)
        return 201, category_to_dict(category)

    def _get_search(self, query):
        keywords = (query.get("q") or "").split()
        if query.get("kind"):
            matches = query_nuggets(self.state.index, keywords, _parse_kind(query["kind"]))
            return 200, {"matches": [nugget_match_to_dict(m) for m in matches]}
        matches = query_pages(self.state.index, keywords)
        return 200, {"matches": [page_match_to_dict(m) for m in matches]}

    def _post_sessions(self, query):
        token, prompt, expires_at = self.state.open_session()
        return 201, {
            "token": token,
            "prompt": prompt,
            "expires_at": _ts_to_str(expires_at),
        }

    def _post_utterance(self, token, query):
        body = self._body()
        utterance = body.get("utterance")
        if not isinstance(utterance, str):
            raise MalformedInputError('body must carry a string field "utterance"')
        holder = self.state.get_session(token)
        with holder.lock:
            prompt, results = dialog.handle_utterance(holder.session, utterance)
            holder.touch()
            return 200, {
                "prompt": prompt,
                "results": None if results is None
                else [nugget_match_to_dict(m) for m in results],
                "state": holder.session.state.value,
            }

    def _get_transcript(self, token, query):
        holder = self.state.get_session(token)
        with holder.lock:
            holder.touch()
            return 200, {
                "transcript": [
                    {"speaker": speaker, "utterance": utterance}
                    for speaker, utterance in holder.session.transcript
                ],
                "text": dialog.export_transcript(holder.session),
            }

    def _get_stats_waypoints(self, query):
        table = corpusstats.tally_waypoints(self.state.corpus())
        return 200, corpusstats.usage_table_to_dict(table)

    def _get_stats_annotations(self, query):
        table = corpusstats.tally_annotations(self.state.corpus())
        return 200, corpusstats.usage_table_to_dict(table)


def make_handler(state: ServiceState) -> type:
    return type("RefindHandler", (_Handler,), {"state": state})


class RefindService:
    """HTTP service bound to one archive directory.

    Construction acquires the directory lock, loads the archive, and builds
    the index; ``serve_forever`` blocks until shutdown or SIGINT/SIGTERM.
    """

    def __init__(
        self,
        archive_path: str | Path,
        bind: str = "127.0.0.1:8080",
        corpus_path: str | Path | None = None,
    ):
        host, _, port_text = bind.rpartition(":")
        if not host or not port_text.isdigit():
            raise MalformedInputError(f"bind address must be host:port, got {bind!r}")
        Path(archive_path).mkdir(parents=True, exist_ok=True)
        self._lock_path = Path(archive_path) / LOCK_FILE
        self._acquire_lock()
        try:
            self.state = ServiceState(archive_path, corpus_path)
            self.httpd = ThreadingHTTPServer((host, int(port_text)), make_handler(self.state))
        except OSError as exc:
            self._release_lock()
            raise RefindError(f"cannot bind {bind}: {exc}") from None
        except Exception:
            self._release_lock()
            raise

    def _acquire_lock(self) -> None:
        while True:
            try:
                fd = os.open(self._lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                os.write(fd, str(os.getpid()).encode())
                os.close(fd)
                return
            except FileExistsError:
                try:
                    pid = int(self._lock_path.read_text() or "0")
                except (OSError, ValueError):
                    pid = 0
                if pid and _pid_alive(pid):
                    raise RefindError(
                        f"archive is owned by running process {pid} "
                        f"({self._lock_path})"
                    ) from None
                self._lock_path.unlink(missing_ok=True)  # stale lock

    def _release_lock(self) -> None:
        self._lock_path.unlink(missing_ok=True)

    @property
    def address(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"{host}:{port}"

    def serve_forever(self) -> None:
        previous = signal.signal(signal.SIGTERM, _raise_interrupt)
        LOGGER.info("serving on %s", self.address)
        try:
            self.httpd.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            signal.signal(signal.SIGTERM, previous)
            self.shutdown()

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        self._release_lock()


def _raise_interrupt(signum, frame):
    raise KeyboardInterrupt


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


def serve(
    archive_path: str | Path,
    bind: str = "127.0.0.1:8080",
    corpus_path: str | Path | None = None,
) -> RefindService:
    """Construct a service; call serve_forever() on the result to block."""
    return RefindService(archive_path, bind=bind, corpus_path=corpus_path)
