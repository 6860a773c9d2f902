"""Tokenization and extraction of small semi-structured facts from page text.

Four fact kinds are recognized: North-American phone numbers, street
addresses, dollar prices, and clock times.  Each extractor returns nuggets
whose ``raw`` slice reproduces the source text exactly and whose
``normalized`` value is in a canonical form that re-normalizes to itself.

Also provides the spoken-form helpers used by the dialog: rendering a phone
number as digit words, parsing one back, and parsing spoken URLs of the
"fandango dot com" shape.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING

from .errors import MalformedInputError

if TYPE_CHECKING:
    from .archive import PageSnapshot


class NuggetKind(str, Enum):
    PHONE_NUMBER = "PhoneNumber"
    ADDRESS = "Address"
    PRICE = "Price"
    TIME = "Time"


@dataclass(frozen=True)
class Token:
    text: str
    position: int  # ordinal within the token sequence, 0-based


@dataclass(frozen=True)
class Span:
    """Half-open character range [start, end) into a page's text."""

    start: int
    end: int


@dataclass(frozen=True)
class Nugget:
    nugget_id: str
    page_id: str
    kind: NuggetKind
    span: Span
    raw: str
    normalized: str


_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[Token]:
    """Split text into lowercase maximal alphanumeric runs, in order.

    Single-character tokens are kept and no stopwords are removed.
    """
    return [
        Token(match.group(), i)
        for i, match in enumerate(_TOKEN_RE.finditer(text.lower()))
    ]


def token_texts(text: str) -> list[str]:
    return [t.text for t in tokenize(text)]


# --- phone numbers ---------------------------------------------------------

# NANP shapes, longest alternatives first so a 10-digit number is not eaten
# as a trailing 7-digit match.
_PHONE_RE = re.compile(
    r"""(?<![\d-])
    (?:
        \(\d{3}\)\s?\d{3}[-. ]\d{4}        # (DDD) DDD-DDDD
      | 1[-. ]\d{3}[-. ]\d{3}[-. ]\d{4}    # 1 DDD DDD DDDD
      | \d{3}[-. ]\d{3}[-. ]\d{4}          # DDD-DDD-DDDD
      | \d{3}[-. ]\d{4}                    # DDD-DDDD
    )
    (?![\d-])""",
    re.VERBOSE,
)


def _normalize_phone(raw: str) -> str:
    digits = re.sub(r"\D", "", raw)
    if len(digits) == 11 and digits.startswith("1"):
        digits = digits[1:]
    if len(digits) == 10:
        return f"{digits[:3]}-{digits[3:6]}-{digits[6:]}"
    return f"{digits[:3]}-{digits[3:]}"


def extract_phones(text: str) -> list[Nugget]:
    return [
        _nugget(NuggetKind.PHONE_NUMBER, m, _normalize_phone(m.group()))
        for m in _PHONE_RE.finditer(text)
    ]


# --- street addresses ------------------------------------------------------

_STREET_SUFFIXES = (
    "Street", "St", "Avenue", "Ave", "Road", "Rd", "Drive", "Dr",
    "Boulevard", "Blvd", "Hall", "Lane", "Ln", "Way",
)

_ADDRESS_RE = re.compile(
    r"""(?<!\d)
    \d{1,6}                                   # house number
    (?:\s+[A-Za-z][A-Za-z'.-]*){1,4}?         # name words
    \s+(?:%s)\b\.?                            # street suffix
    (?:,\s*[A-Z][A-Za-z'-]*(?:\s+[A-Z][A-Za-z'-]*)*)?   # optional city
    (?:\s+\d{5}(?!\d))?                       # optional ZIP
    """ % "|".join(_STREET_SUFFIXES),
    re.VERBOSE,
)


def extract_addresses(text: str) -> list[Nugget]:
    out = []
    for m in _ADDRESS_RE.finditer(text):
        normalized = " ".join(m.group().split())
        out.append(_nugget(NuggetKind.ADDRESS, m, normalized))
    return out


# --- prices ----------------------------------------------------------------

_PRICE_RE = re.compile(
    r"\$\d+(?:\.\d{2})?(?:[-–]\$\d+(?:\.\d{2})?)?(?!\d)"
)


def extract_prices(text: str) -> list[Nugget]:
    return [
        _nugget(NuggetKind.PRICE, m, m.group().replace("–", "-"))
        for m in _PRICE_RE.finditer(text)
    ]


# --- times -----------------------------------------------------------------

_TIME_RE = re.compile(
    r"(?<![\d:])([01]?\d|2[0-3]):([0-5]\d)(?!\d)(?:\s?(am|pm|AM|PM)\b)?"
)


def _normalize_time(hour: int, minute: int, meridiem: str | None) -> str:
    if meridiem is not None and 1 <= hour <= 12:
        if meridiem.lower() == "am":
            hour = 0 if hour == 12 else hour
        else:
            hour = 12 if hour == 12 else hour + 12
    return f"{hour:02d}:{minute:02d}"


def extract_times(text: str) -> list[Nugget]:
    out = []
    for m in _TIME_RE.finditer(text):
        normalized = _normalize_time(int(m.group(1)), int(m.group(2)), m.group(3))
        out.append(_nugget(NuggetKind.TIME, m, normalized))
    return out


# --- dispatch --------------------------------------------------------------

_EXTRACTORS = {
    NuggetKind.PHONE_NUMBER: extract_phones,
    NuggetKind.ADDRESS: extract_addresses,
    NuggetKind.PRICE: extract_prices,
    NuggetKind.TIME: extract_times,
}


def supported_kinds() -> list[NuggetKind]:
    return list(_EXTRACTORS)


def _nugget(kind: NuggetKind, match: re.Match, normalized: str) -> Nugget:
    span = Span(match.start(), match.end())
    return Nugget(
        nugget_id=f"{kind.value}:{span.start}",
        page_id="",
        kind=kind,
        span=span,
        raw=match.group(),
        normalized=normalized,
    )


def extract_nuggets(
    snapshot: "PageSnapshot", kinds: set[NuggetKind] | None = None
) -> list[Nugget]:
    """Run the per-kind extractors over a snapshot's text and merge the results.

    Nuggets are stamped with the page id and sorted by span start.
    """
    if kinds is None:
        kinds = set(_EXTRACTORS)
    found: list[Nugget] = []
    for kind in _EXTRACTORS:
        if kind not in kinds:
            continue
        for nugget in _EXTRACTORS[kind](snapshot.text):
            found.append(
                replace(
                    nugget,
                    page_id=snapshot.page_id,
                    nugget_id=f"{snapshot.page_id}:{nugget.nugget_id}",
                )
            )
    found.sort(key=lambda n: (n.span.start, n.span.end, n.kind.value))
    return found


# --- spoken forms ----------------------------------------------------------

_DIGIT_WORDS = [
    "zero", "one", "two", "three", "four",
    "five", "six", "seven", "eight", "nine",
]
_WORD_DIGITS = {w: str(d) for d, w in enumerate(_DIGIT_WORDS)}

_NORMALIZED_PHONE_RE = re.compile(r"\d+(?:-\d+)*$")


def speak_digits(normalized_phone: str) -> str:
    """Render a normalized phone value as spoken digit words.

    Digits become their English words; each ``-`` group separator becomes a
    literal ``{pause}`` token.  All tokens are single-space separated.
    """
    if not _NORMALIZED_PHONE_RE.fullmatch(normalized_phone):
        raise MalformedInputError(f"not a normalized phone value: {normalized_phone!r}")
    words = [
        "{pause}" if ch == "-" else _DIGIT_WORDS[int(ch)]
        for ch in normalized_phone
    ]
    return " ".join(words)


def parse_spoken_digits(spoken: str) -> str:
    """Inverse of speak_digits: digit words and {pause} back to a phone value."""
    out: list[str] = []
    for word in spoken.split():
        if word == "{pause}":
            out.append("-")
        elif word in _WORD_DIGITS:
            out.append(_WORD_DIGITS[word])
        else:
            raise MalformedInputError(f"not a spoken digit: {word!r}")
    value = "".join(out)
    if not _NORMALIZED_PHONE_RE.fullmatch(value):
        raise MalformedInputError(f"not a spoken phone value: {spoken!r}")
    return value


_SPOKEN_TLDS = {"com", "org", "net", "edu", "gov"}


def parse_spoken_url(utterance: str) -> str | None:
    """Parse a trailing spoken URL such as "Fandango dot com".

    Recognizes, case-insensitively and at the end of the utterance,
    ``(w w w dot)? <word>+ dot <tld>`` where tld is one of com, org, net,
    edu, gov.  Host words are lowercased and joined without spaces; each
    "dot" becomes ".".  Returns None when the pattern is absent.  Leading
    tokens outside the matched suffix are ignored.
    """
    words = [w.strip(string.punctuation).lower() for w in utterance.split()]
    if len(words) < 3 or words[-1] not in _SPOKEN_TLDS or words[-2] != "dot":
        return None
    # collect the host: the maximal run of clean alphanumeric words (never
    # "dot") immediately before the final "dot <tld>"
    i = len(words) - 3
    host: list[str] = []
    while i >= 0 and words[i] != "dot" and words[i].isalnum():
        host.append(words[i])
        i -= 1
    if not host:
        return None
    host.reverse()
    prefix = ""
    if words[max(i - 3, 0) : i + 1] == ["w", "w", "w", "dot"]:
        prefix = "www."
    return prefix + "".join(host) + "." + words[-1]
