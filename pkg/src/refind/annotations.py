"""User annotations on archived pages: highlights, notes, and drawings.

Highlights and notes anchor to a character span of the page text; drawings
carry one of a fixed set of region labels instead of geometry.  Every
annotation may carry a single classification category.  Three builtin
categories (movies, restaurants, travel) always exist and cannot be removed.

Records live in ``annotations.json`` inside the archive directory, schema
``"format": 1``, under the same single-writer/multi-reader contract as the
archive.  Anchors store both the offsets and the quoted text; if they ever
disagree at load time the quoted text wins and the record is flagged stale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum

from .archive import Archive, _as_utc, _ts_from_str, _ts_to_str
from .errors import ConflictError, MalformedInputError, MalformedQueryError, NotFoundError
from .extractor import Span, token_texts

ANNOTATIONS_FORMAT = 1
BUILTIN_CATEGORIES = ("movies", "restaurants", "travel")
DRAWING_LABELS = ("circled", "underlined", "arrow", "x-mark", "box")


class AnnotationKind(str, Enum):
    HIGHLIGHT = "Highlight"
    NOTE = "Note"
    DRAWING = "Drawing"


@dataclass(frozen=True)
class Category:
    name: str
    builtin: bool = False


@dataclass(frozen=True)
class Annotation:
    annotation_id: str
    page_id: str
    kind: AnnotationKind
    span: Span | None  # Highlight/Note anchor
    region: str | None  # Drawing anchor
    quoted: str  # anchored text at creation time (region label for drawings)
    body: str | None
    category: str | None
    created_at: datetime
    stale: bool = False

    @property
    def anchored_text(self) -> str:
        return self.quoted


class AnnotationStore:
    """Annotation and category store bound to one archive."""

    def __init__(self, archive: Archive):
        self.archive = archive
        self.path = archive.path / "annotations.json"
        self._categories: dict[str, Category] = {}
        self._annotations: list[Annotation] = []
        for name in BUILTIN_CATEGORIES:
            self._categories[name] = Category(name=name, builtin=True)
        if self.path.exists():
            self._load()
        else:
            self._save()

    # -- persistence --

    def _load(self) -> None:
        raw = json.loads(self.path.read_text("utf-8"))
        if raw.get("format") != ANNOTATIONS_FORMAT:
            raise MalformedInputError(
                f"unsupported annotations format: {raw.get('format')!r}"
            )
        for rec in raw["categories"]:
            if rec["name"].lower() not in self._categories:
                self._categories[rec["name"].lower()] = Category(
                    name=rec["name"], builtin=False
                )
        for rec in raw["annotations"]:
            span = Span(*rec["span"]) if rec.get("span") is not None else None
            note = Annotation(
                annotation_id=rec["annotation_id"],
                page_id=rec["page_id"],
                kind=AnnotationKind(rec["kind"]),
                span=span,
                region=rec.get("region"),
                quoted=rec["quoted"],
                body=rec.get("body"),
                category=rec.get("category"),
                created_at=_ts_from_str(rec["created_at"]),
            )
            # quoted text wins over drifted offsets; snapshots are immutable,
            # so a mismatch means the record (not the page) went bad
            if span is not None and note.page_id in self.archive:
                text = self.archive.get_snapshot(note.page_id).text
                sliced = text[span.start : span.end]
                if sliced != note.quoted:
                    note = replace(note, stale=True)
            self._annotations.append(note)

    def _save(self) -> None:
        payload = {
            "format": ANNOTATIONS_FORMAT,
            "categories": [
                {"name": c.name, "builtin": c.builtin}
                for c in self._categories.values()
            ],
            "annotations": [
                {
                    "annotation_id": a.annotation_id,
                    "page_id": a.page_id,
                    "kind": a.kind.value,
                    "span": [a.span.start, a.span.end] if a.span else None,
                    "region": a.region,
                    "quoted": a.quoted,
                    "body": a.body,
                    "category": a.category,
                    "created_at": _ts_to_str(a.created_at),
                }
                for a in self._annotations
            ],
        }
        tmp = self.path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=1), "utf-8")
        tmp.replace(self.path)

    # -- categories --

    def create_category(self, name: str) -> Category:
        if not name or not name.strip():
            raise MalformedInputError("category name must be non-empty")
        name = name.strip()
        if name.lower() in self._categories:
            raise ConflictError(f"category exists: {name!r}")
        category = Category(name=name, builtin=False)
        self._categories[name.lower()] = category
        self._save()
        return category

    def categories(self) -> list[Category]:
        return list(self._categories.values())

    def _resolve_category(self, name: str) -> Category:
        try:
            return self._categories[name.strip().lower()]
        except KeyError:
            raise NotFoundError(f"unknown category: {name!r}") from None

    # -- annotations --

    def add_annotation(
        self,
        page_id: str,
        kind: AnnotationKind | str,
        anchor: Span | tuple[int, int] | str,
        body: str | None = None,
        category: str | None = None,
        created_at: datetime | None = None,
    ) -> Annotation:
        """Attach a highlight, note, or drawing to an archived page.

        Highlights and notes take a character span; drawings take one of
        the fixed region labels.
        """
        kind = AnnotationKind(kind)
        snapshot = self.archive.get_snapshot(page_id)  # raises NotFoundError
        category_name = None
        if category is not None:
            category_name = self._resolve_category(category).name

        span: Span | None = None
        region: str | None = None
        if kind is AnnotationKind.DRAWING:
            if not isinstance(anchor, str) or anchor not in DRAWING_LABELS:
                raise MalformedInputError(
                    f"drawing region must be one of {DRAWING_LABELS}, got {anchor!r}"
                )
            region = anchor
            quoted = anchor
        else:
            if isinstance(anchor, tuple):
                anchor = Span(*anchor)
            if not isinstance(anchor, Span):
                raise MalformedInputError(f"span anchor required for {kind.value}")
            if not (0 <= anchor.start <= anchor.end <= len(snapshot.text)):
                raise MalformedInputError(
                    f"span {anchor.start}:{anchor.end} out of bounds for page text "
                    f"of length {len(snapshot.text)}"
                )
            span = anchor
            quoted = snapshot.text[anchor.start : anchor.end]

        if created_at is None:
            created_at = datetime.now(timezone.utc)
        note = Annotation(
            annotation_id=f"a{len(self._annotations) + 1:06d}",
            page_id=page_id,
            kind=kind,
            span=span,
            region=region,
            quoted=quoted,
            body=body,
            category=category_name,
            created_at=_as_utc(created_at),
        )
        self._annotations.append(note)
        self._save()
        return note

    def all_annotations(self) -> list[Annotation]:
        return sorted(
            self._annotations, key=lambda a: (a.created_at, a.annotation_id)
        )

    def list_by_site(self) -> dict[str, list[Annotation]]:
        """Partition all annotations by the host of their page's URL."""
        grouped: dict[str, list[Annotation]] = {}
        for note in self.all_annotations():
            grouped.setdefault(self.archive.host_of(note.page_id), []).append(note)
        return grouped

    def list_by_category(self, category: str | None) -> list[Annotation]:
        """Annotations tagged with the category; None selects the untagged."""
        if category is None:
            return [a for a in self.all_annotations() if a.category is None]
        name = self._resolve_category(category).name
        return [a for a in self.all_annotations() if a.category == name]

    def search_annotations(self, keywords: list[str]) -> list[Annotation]:
        """Annotations whose body or anchored text contains every keyword."""
        if not keywords:
            raise MalformedQueryError("empty keyword list")
        query: set[str] = set()
        for word in keywords:
            query.update(token_texts(word))
        if not query:
            raise MalformedQueryError("no usable keywords in query")
        out = []
        for note in self.all_annotations():
            haystack = set(token_texts(note.body or ""))
            haystack.update(token_texts(note.anchored_text))
            if query <= haystack:
                out.append(note)
        return out

    def pages_with_category(self, category: str) -> set[str]:
        """Page ids having at least one annotation in the category (loose:
        unknown names yield the empty set)."""
        name = category.strip().lower()
        stored = self._categories.get(name)
        if stored is None:
            return set()
        return {a.page_id for a in self._annotations if a.category == stored.name}
