"""Persistent page archive: snapshots, a visit history log, and waypoints.

An archive is a directory holding ``manifest.json`` (snapshot and visit
records, schema ``"format": 1``) plus one raw-markup file per snapshot under
``pages/``.  Page identity is the pair (url, markup): the page id is the
first 16 hex characters of SHA-256 over ``url + "\\n" + html``, so re-ingesting
the identical pair reuses the snapshot and only appends a visit event.

Writers must be serialized by the caller (single-writer, multi-reader);
returned records are immutable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urlparse

from .errors import MalformedInputError, NotFoundError

MANIFEST_FORMAT = 1
DESCRIPTION_LIMIT = 240

# elements whose boundaries separate text blocks
_BLOCK_TAGS = {
    "address", "article", "aside", "blockquote", "body", "br", "caption",
    "dd", "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer",
    "form", "h1", "h2", "h3", "h4", "h5", "h6", "head", "header", "hr",
    "html", "li", "main", "nav", "ol", "option", "p", "pre", "section",
    "select", "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul",
}
_SKIP_TAGS = {"script", "style"}


class _TextExtractor(HTMLParser):
    """Collects body text (title and script/style content excluded)."""

    def __init__(self) -> None:
        super().__init__()
        self.parts: list[str] = []
        self.title_parts: list[str] = []
        self._skip_depth = 0
        self._in_title = False

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
        elif tag == "title":
            self._in_title = True
        elif tag in _BLOCK_TAGS:
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag == "title":
            self._in_title = False
        elif tag in _BLOCK_TAGS:
            self.parts.append("\n")

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)

    def handle_data(self, data):
        if self._in_title:
            self.title_parts.append(data)
        elif not self._skip_depth:
            self.parts.append(data)


def extract_text(html: str) -> tuple[str, str]:
    """Strip markup from a document; returns (title, text).

    Block-level elements become newlines, other whitespace runs collapse to
    a single space, and script/style contents are dropped.  Deterministic:
    identical markup always yields identical output.
    """
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    title = " ".join("".join(parser.title_parts).split())
    lines = []
    for line in "".join(parser.parts).split("\n"):
        collapsed = " ".join(line.split())
        if collapsed:
            lines.append(collapsed)
    return title, "\n".join(lines)


def summarize(text: str, limit: int = DESCRIPTION_LIMIT) -> str:
    """Prefix summary: first ``limit`` characters of the whitespace-collapsed
    text, cut back to the last word boundary."""
    collapsed = " ".join(text.split())
    if len(collapsed) <= limit:
        return collapsed
    prefix = collapsed[:limit]
    cut = prefix.rfind(" ")
    if cut > 0:
        prefix = prefix[:cut]
    return prefix.rstrip()


def page_id_for(url: str, html: bytes) -> str:
    digest = hashlib.sha256(url.encode("utf-8") + b"\n" + html)
    return digest.hexdigest()[:16]


def _as_utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).replace(microsecond=0)


def _ts_to_str(value: datetime) -> str:
    return _as_utc(value).strftime("%Y-%m-%dT%H:%M:%SZ")


def _ts_from_str(value: str) -> datetime:
    return datetime.strptime(value, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class PageSnapshot:
    page_id: str
    url: str
    title: str
    fetched_at: datetime
    html: bytes
    text: str
    description: str


@dataclass(frozen=True)
class VisitEvent:
    visit_id: str
    page_id: str
    visited_at: datetime
    referrer_page_id: str | None = None


@dataclass(frozen=True)
class Waypoint:
    """The three descriptor categories a page can be recognized by."""

    page_id: str
    url: str
    title: str
    description: str


class Archive:
    """Snapshot store over a directory; creates it on first use."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.pages_dir = self.path / "pages"
        self._snapshots: dict[str, PageSnapshot] = {}
        self._visits: list[VisitEvent] = []
        if (self.path / "manifest.json").exists():
            self._load()
        else:
            self.path.mkdir(parents=True, exist_ok=True)
            self.pages_dir.mkdir(exist_ok=True)
            self._save()

    # -- persistence --

    def _load(self) -> None:
        raw = json.loads((self.path / "manifest.json").read_text("utf-8"))
        if raw.get("format") != MANIFEST_FORMAT:
            raise MalformedInputError(
                f"unsupported manifest format: {raw.get('format')!r}"
            )
        for rec in raw["pages"]:
            html = (self.pages_dir / f"{rec['page_id']}.html").read_bytes()
            self._snapshots[rec["page_id"]] = PageSnapshot(
                page_id=rec["page_id"],
                url=rec["url"],
                title=rec["title"],
                fetched_at=_ts_from_str(rec["fetched_at"]),
                html=html,
                text=rec["text"],
                description=rec["description"],
            )
        for rec in raw["visits"]:
            self._visits.append(
                VisitEvent(
                    visit_id=rec["visit_id"],
                    page_id=rec["page_id"],
                    visited_at=_ts_from_str(rec["visited_at"]),
                    referrer_page_id=rec.get("referrer_page_id"),
                )
            )

    def _save(self) -> None:
        manifest = {
            "format": MANIFEST_FORMAT,
            "pages": [
                {
                    "page_id": s.page_id,
                    "url": s.url,
                    "title": s.title,
                    "fetched_at": _ts_to_str(s.fetched_at),
                    "text": s.text,
                    "description": s.description,
                }
                for s in self._snapshots.values()
            ],
            "visits": [
                {
                    "visit_id": v.visit_id,
                    "page_id": v.page_id,
                    "visited_at": _ts_to_str(v.visited_at),
                    "referrer_page_id": v.referrer_page_id,
                }
                for v in self._visits
            ],
        }
        tmp = self.path / "manifest.json.tmp"
        tmp.write_text(json.dumps(manifest, ensure_ascii=False, indent=1), "utf-8")
        tmp.replace(self.path / "manifest.json")

    # -- operations --

    def ingest_page(
        self,
        url: str,
        html: bytes,
        fetched_at: datetime | None = None,
        referrer: str | None = None,
    ) -> PageSnapshot:
        """Store a page and append a visit event.

        An identical (url, html) pair reuses the existing snapshot; only a
        new visit event is recorded.
        """
        parsed = urlparse(url)
        if not parsed.scheme or not parsed.netloc:
            raise MalformedInputError(f"not an absolute URL: {url!r}")
        if not html:
            raise MalformedInputError("empty document")
        if referrer is not None and referrer not in self._snapshots:
            raise NotFoundError(f"unknown referrer page: {referrer!r}")
        if fetched_at is None:
            fetched_at = datetime.now(timezone.utc)
        fetched_at = _as_utc(fetched_at)

        page_id = page_id_for(url, html)
        snapshot = self._snapshots.get(page_id)
        if snapshot is None:
            title, text = extract_text(html.decode("utf-8", errors="replace"))
            snapshot = PageSnapshot(
                page_id=page_id,
                url=url,
                title=title,
                fetched_at=fetched_at,
                html=html,
                text=text,
                description=summarize(text),
            )
            self._snapshots[page_id] = snapshot
            (self.pages_dir / f"{page_id}.html").write_bytes(html)

        self._visits.append(
            VisitEvent(
                visit_id=f"v{len(self._visits) + 1:06d}",
                page_id=page_id,
                visited_at=fetched_at,
                referrer_page_id=referrer,
            )
        )
        self._save()
        return snapshot

    def get_snapshot(self, page_id: str) -> PageSnapshot:
        try:
            return self._snapshots[page_id]
        except KeyError:
            raise NotFoundError(f"unknown page: {page_id!r}") from None

    def __contains__(self, page_id: str) -> bool:
        return page_id in self._snapshots

    def page_ids(self) -> list[str]:
        return list(self._snapshots)

    def snapshots(self) -> list[PageSnapshot]:
        return list(self._snapshots.values())

    def list_history(
        self,
        start: datetime | None = None,
        end: datetime | None = None,
    ) -> list[VisitEvent]:
        """Visit events in ascending (visited_at, visit_id) order.

        The optional [start, end] range is inclusive; an inverted range
        yields an empty list.
        """
        events = sorted(self._visits, key=lambda v: (v.visited_at, v.visit_id))
        if start is not None:
            start = _as_utc(start)
            events = [v for v in events if v.visited_at >= start]
        if end is not None:
            end = _as_utc(end)
            events = [v for v in events if v.visited_at <= end]
        return events

    def waypoint_descriptor(self, page_id: str) -> Waypoint:
        s = self.get_snapshot(page_id)
        return Waypoint(
            page_id=s.page_id, url=s.url, title=s.title, description=s.description
        )

    def host_of(self, page_id: str) -> str:
        host = urlparse(self.get_snapshot(page_id).url).hostname
        return host.lower() if host else ""
