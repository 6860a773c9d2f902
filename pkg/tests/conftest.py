"""Shared fixtures: the Anytown sample archive and synthetic page helpers."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from refind.annotations import AnnotationStore
from refind.archive import Archive
from refind.extractor import extract_nuggets
from refind.index import build_index

ANYTOWN_URL = "http://anytown.example/hotel"
ANYTOWN_HTML = b"""<html><head><title>Anytown Hotel Home Page</title></head>
<body><h1>Anytown Hotel</h1>
<p>Welcome to the Anytown Hotel. For reservations call 555-1234.</p>
<p>123 Main Street, Anytown 24060. Rooms from $89.00. Check-in 3:00 pm.</p>
</body></html>"""

CINEMA_URL = "http://cinema.example/showtimes"
CINEMA_HTML = b"""<html><head><title>Starlight Cinema Showtimes</title></head>
<body><p>Space Raiders plays at 7:15 pm and 9:45 pm. Tickets $9.50,
matinee $6.00. Box office 555-867-5309.</p>
<p>Find us at 42 Orbit Avenue, Anytown.</p></body></html>"""

DINER_URL = "http://food.example/diner"
DINER_HTML = b"""<html><head><title>Moonbeam Diner</title></head>
<body><p>Open until 11:30 pm. Entrees $10-$20. Call 555-2468 or visit
9 Crescent Lane.</p></body></html>"""


def ts(day: int, hour: int = 12) -> datetime:
    return datetime(2026, 1, day, hour, 0, 0, tzinfo=timezone.utc)


@pytest.fixture
def anytown_archive(tmp_path) -> Archive:
    archive = Archive(tmp_path / "archive")
    archive.ingest_page(ANYTOWN_URL, ANYTOWN_HTML, ts(5))
    return archive


@pytest.fixture
def town_archive(tmp_path) -> Archive:
    """Three pages on three hosts covering all nugget kinds."""
    archive = Archive(tmp_path / "archive")
    archive.ingest_page(ANYTOWN_URL, ANYTOWN_HTML, ts(5))
    archive.ingest_page(CINEMA_URL, CINEMA_HTML, ts(6))
    archive.ingest_page(DINER_URL, DINER_HTML, ts(7))
    return archive


def indexed(archive: Archive):
    nuggets = [n for s in archive.snapshots() for n in extract_nuggets(s)]
    return build_index(archive, nuggets)


@pytest.fixture
def anytown_index(anytown_archive):
    return indexed(anytown_archive)


@pytest.fixture
def town_index(town_archive):
    return indexed(town_archive)


@pytest.fixture
def anytown_store(anytown_archive) -> AnnotationStore:
    return AnnotationStore(anytown_archive)


@pytest.fixture
def town_store(town_archive) -> AnnotationStore:
    return AnnotationStore(town_archive)


def make_page(title: str, body: str) -> bytes:
    return (
        f"<html><head><title>{title}</title></head>"
        f"<body><p>{body}</p></body></html>"
    ).encode("utf-8")
