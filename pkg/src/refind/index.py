"""Keyword and nugget index over an archive.

Maps tokens to the pages containing them (with term frequencies) and nugget
kinds to the nuggets found per page.  Queries use AND semantics; a page must
contain every keyword in its body or title.  Ranking is the sum of term
frequencies plus a fixed boost of 10 per keyword that appears in the title,
with ties broken by ascending page id.  An index is immutable once built;
rebuilding from the same inputs yields an equal value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .archive import Archive
from .errors import ConsistencyError, MalformedInputError, MalformedQueryError
from .extractor import Nugget, NuggetKind, Span, token_texts

TITLE_BOOST = 10
INDEX_FORMAT = 1


@dataclass(frozen=True)
class PageMatch:
    page_id: str
    score: int
    matched_tokens: frozenset[str]


@dataclass(frozen=True)
class NuggetMatch:
    page_id: str
    nugget_id: str
    kind: NuggetKind
    normalized: str


@dataclass
class Index:
    postings: dict[str, dict[str, int]] = field(default_factory=dict)
    nugget_map: dict[NuggetKind, dict[str, list[str]]] = field(default_factory=dict)
    titles: dict[str, list[str]] = field(default_factory=dict)
    nuggets_by_id: dict[str, Nugget] = field(default_factory=dict)

    @property
    def vocabulary(self) -> set[str]:
        return set(self.postings)

    def page_count(self) -> int:
        return len(self.titles)


def build_index(archive: Archive, nuggets: list[Nugget]) -> Index:
    """Combine tokenized page text, titles, and extracted nuggets.

    Raises ConsistencyError if a nugget references a page the archive does
    not hold.
    """
    index = Index()
    for snapshot in archive.snapshots():
        body_tokens = token_texts(snapshot.text)
        title_tokens = token_texts(snapshot.title)
        index.titles[snapshot.page_id] = title_tokens
        for token in body_tokens + title_tokens:
            index.postings.setdefault(token, {})
            index.postings[token][snapshot.page_id] = (
                index.postings[token].get(snapshot.page_id, 0) + 1
            )
    for nugget in sorted(nuggets, key=lambda n: (n.span.start, n.span.end)):
        if nugget.page_id not in index.titles:
            raise ConsistencyError(
                f"nugget {nugget.nugget_id!r} references unknown page "
                f"{nugget.page_id!r}"
            )
        per_kind = index.nugget_map.setdefault(nugget.kind, {})
        per_kind.setdefault(nugget.page_id, []).append(nugget.nugget_id)
        index.nuggets_by_id[nugget.nugget_id] = nugget
    return index


def _clean_keywords(keywords: list[str]) -> list[str]:
    """Re-tokenize and deduplicate query keywords, preserving order."""
    seen: dict[str, None] = {}
    for word in keywords:
        for token in token_texts(word):
            seen.setdefault(token)
    if not seen:
        raise MalformedQueryError("no usable keywords in query")
    return list(seen)


def query_pages(index: Index, keywords: list[str]) -> list[PageMatch]:
    """Pages containing every keyword, best match first."""
    tokens = _clean_keywords(keywords)
    candidates: set[str] | None = None
    for token in tokens:
        pages = set(index.postings.get(token, {}))
        candidates = pages if candidates is None else candidates & pages
        if not candidates:
            return []
    assert candidates is not None
    matches = []
    for page_id in candidates:
        tf = sum(index.postings[token][page_id] for token in tokens)
        in_title = sum(1 for token in tokens if token in index.titles[page_id])
        matches.append(
            PageMatch(
                page_id=page_id,
                score=tf + TITLE_BOOST * in_title,
                matched_tokens=frozenset(tokens),
            )
        )
    matches.sort(key=lambda m: (-m.score, m.page_id))
    return matches


def nuggets_on_pages(
    index: Index, page_ids: list[str], kind: NuggetKind
) -> list[NuggetMatch]:
    """Nuggets of one kind on the given pages, page order then span order."""
    per_page = index.nugget_map.get(kind, {})
    out = []
    for page_id in page_ids:
        for nugget_id in per_page.get(page_id, []):
            nugget = index.nuggets_by_id[nugget_id]
            out.append(
                NuggetMatch(
                    page_id=page_id,
                    nugget_id=nugget_id,
                    kind=kind,
                    normalized=nugget.normalized,
                )
            )
    return out


def query_nuggets(
    index: Index, keywords: list[str], kind: NuggetKind
) -> list[NuggetMatch]:
    """Nuggets of the given kind on pages matching the keywords."""
    pages = [m.page_id for m in query_pages(index, keywords)]
    return nuggets_on_pages(index, pages, kind)


def vocabulary(index: Index) -> list[str]:
    return sorted(index.postings)


# -- optional on-disk cache -------------------------------------------------

def save_index(index: Index, archive_path: str | Path) -> Path:
    """Write the advisory index cache; always reproducible from the archive."""
    path = Path(archive_path) / "index.json"
    payload = {
        "format": INDEX_FORMAT,
        "postings": index.postings,
        "titles": index.titles,
        "nuggets": [
            {
                "nugget_id": n.nugget_id,
                "page_id": n.page_id,
                "kind": n.kind.value,
                "span": [n.span.start, n.span.end],
                "raw": n.raw,
                "normalized": n.normalized,
            }
            for kind in sorted(index.nugget_map, key=lambda k: k.value)
            for page in sorted(index.nugget_map[kind])
            for n in (index.nuggets_by_id[i] for i in index.nugget_map[kind][page])
        ],
    }
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=1), "utf-8")
    return path


def load_index(archive_path: str | Path) -> Index:
    path = Path(archive_path) / "index.json"
    raw = json.loads(path.read_text("utf-8"))
    if raw.get("format") != INDEX_FORMAT:
        raise MalformedInputError(f"unsupported index format: {raw.get('format')!r}")
    index = Index()
    index.postings = {t: dict(pages) for t, pages in raw["postings"].items()}
    index.titles = {p: list(tokens) for p, tokens in raw["titles"].items()}
    for rec in raw["nuggets"]:
        nugget = Nugget(
            nugget_id=rec["nugget_id"],
            page_id=rec["page_id"],
            kind=NuggetKind(rec["kind"]),
            span=Span(rec["span"][0], rec["span"][1]),
            raw=rec["raw"],
            normalized=rec["normalized"],
        )
        index.nuggets_by_id[nugget.nugget_id] = nugget
        per_kind = index.nugget_map.setdefault(nugget.kind, {})
        per_kind.setdefault(nugget.page_id, []).append(nugget.nugget_id)
    return index
