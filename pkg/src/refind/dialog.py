"""Deterministic slot-filling dialog for re-finding facts on archived pages.

The dialog collects two slots (page-identifying keywords and an information
kind), confirms them, runs the query, and reads the results back with
``{pause}`` markers where a speech layer would insert breaks.  After results
are read, volunteering new keywords enters an iterative refinement mode that
narrows the candidate pages using keywords, annotation categories, or an
ordinal pick.

All prompt strings are fixed constants (see docs/prompts.md) so transcripts
are reproducible byte for byte.  Sessions are single-threaded; distinct
sessions are independent over the shared immutable index.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from enum import Enum

from .annotations import AnnotationStore
from .archive import Archive, summarize
from .errors import SessionClosedError
from .extractor import NuggetKind, parse_spoken_url, speak_digits, token_texts
from .index import Index, NuggetMatch, nuggets_on_pages, query_pages


class DialogState(Enum):
    WELCOME = "Welcome"
    COLLECT_KEYWORDS = "CollectKeywords"
    COLLECT_KIND = "CollectKind"
    CONFIRM = "Confirm"
    RESULTS = "Results"
    REFINE = "Refine"
    DONE = "Done"


class ActType(Enum):
    KEYWORDS = "Keywords"
    INFO_KIND = "InfoKind"
    YES = "Yes"
    NO = "No"
    SELECT_ORDINAL = "SelectOrdinal"
    CATEGORY_FILTER = "CategoryFilter"
    SPOKEN_URL = "SpokenUrl"
    START_OVER = "StartOver"
    HELP = "Help"
    UNRECOGNIZED = "Unrecognized"


@dataclass(frozen=True)
class DialogAct:
    type: ActType
    keywords: tuple[str, ...] = ()
    kind: NuggetKind | None = None
    ordinal: int | None = None
    category: str | None = None
    url: str | None = None


# -- prompt constants --------------------------------------------------------

KEYWORD_PROMPT = "Please say some words to help identify the pages to search."
WELCOME_PROMPT = "Welcome to the WebContext system. " + KEYWORD_PROMPT
KIND_PROMPT = "What piece of information are you looking for?"
GOODBYE_PROMPT = "Goodbye."
NO_MATCHES_PROMPT = "I found no matches."
NO_CANDIDATES_PROMPT = "No pages match."
UNRECOGNIZED_PREFIX = "Sorry, I did not understand."
RESULTS_REPROMPT = "Say yes to finish, or say new keywords to refine."
HELP_PROMPT = (
    "Say keywords that identify a page, then the kind of information you "
    "want: phone numbers, addresses, prices, or times. Say start over to "
    "begin again."
)

KIND_PLURALS = {
    NuggetKind.PHONE_NUMBER: "phone numbers",
    NuggetKind.ADDRESS: "addresses",
    NuggetKind.PRICE: "prices",
    NuggetKind.TIME: "times",
}

_KIND_PHRASES = {
    "phone number": NuggetKind.PHONE_NUMBER,
    "phone numbers": NuggetKind.PHONE_NUMBER,
    "address": NuggetKind.ADDRESS,
    "addresses": NuggetKind.ADDRESS,
    "price": NuggetKind.PRICE,
    "prices": NuggetKind.PRICE,
    "time": NuggetKind.TIME,
    "times": NuggetKind.TIME,
    "showtime": NuggetKind.TIME,
    "showtimes": NuggetKind.TIME,
}

_YES_WORDS = {"yes", "correct", "yeah"}
_NO_WORDS = {"no", "nope"}
_START_OVER = {"start over", "restart", "reset"}
_HELP_WORDS = {"help"}

_ORDINALS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}
_CARDINALS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}

_COUNT_WORDS = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
]


def _spell_count(n: int) -> str:
    return _COUNT_WORDS[n] if 0 <= n < len(_COUNT_WORDS) else str(n)


@dataclass
class DialogSession:
    session_id: str
    index: Index
    annotations: AnnotationStore
    archive: Archive
    state: DialogState = DialogState.WELCOME
    keywords_slot: list[str] | None = None
    keywords_text: str = ""
    kind_slot: NuggetKind | None = None
    category_filter: str | None = None
    candidates: list[str] = field(default_factory=list)
    transcript: list[tuple[str, str]] = field(default_factory=list)
    last_results: list[NuggetMatch] | None = None


def start_session(index: Index, annotations: AnnotationStore) -> tuple[DialogSession, str]:
    """Open a session; the returned prompt asks for page keywords."""
    session = DialogSession(
        session_id=uuid.uuid4().hex[:12],
        index=index,
        annotations=annotations,
        archive=annotations.archive,
        state=DialogState.COLLECT_KEYWORDS,
    )
    session.transcript.append(("system", WELCOME_PROMPT))
    return session, WELCOME_PROMPT


def _normalize(utterance: str) -> str:
    return " ".join(utterance.split()).lower().strip(".,!?;: ")


def _display_text(utterance: str) -> str:
    return " ".join(utterance.split()).rstrip(".,!?;: ")


def _parse_ordinal(norm: str) -> int | None:
    words = norm.split()
    if words and words[0] == "the":
        words = words[1:]
    if not words:
        return None
    if words[0] == "number" and len(words) == 2:
        if words[1].isdigit():
            return int(words[1])
        return _CARDINALS.get(words[1])
    n = _ORDINALS.get(words[0])
    if n is not None and words[1:] in ([], ["one"]):
        return n
    return None


def classify_utterance(utterance: str, state: DialogState) -> DialogAct:
    """Total, deterministic mapping from an utterance to one dialog act."""
    norm = _normalize(utterance)
    if norm in _YES_WORDS:
        return DialogAct(ActType.YES)
    if norm in _NO_WORDS:
        return DialogAct(ActType.NO)
    if norm in _START_OVER:
        return DialogAct(ActType.START_OVER)
    if norm in _HELP_WORDS:
        return DialogAct(ActType.HELP)
    if norm.startswith("category "):
        return DialogAct(ActType.CATEGORY_FILTER, category=norm[len("category "):].strip())
    url = parse_spoken_url(utterance)
    if url is not None:
        return DialogAct(ActType.SPOKEN_URL, url=url)
    if state is DialogState.COLLECT_KIND:
        phrase = norm[4:] if norm.startswith("the ") else norm
        kind = _KIND_PHRASES.get(phrase)
        if kind is not None:
            return DialogAct(ActType.INFO_KIND, kind=kind)
    if state is DialogState.REFINE:
        ordinal = _parse_ordinal(norm)
        if ordinal is not None:
            return DialogAct(ActType.SELECT_ORDINAL, ordinal=ordinal)
    tokens = tuple(token_texts(utterance))
    if tokens:
        return DialogAct(ActType.KEYWORDS, keywords=tokens)
    return DialogAct(ActType.UNRECOGNIZED)


def _page_label(archive: Archive, page_id: str) -> str:
    snapshot = archive.get_snapshot(page_id)
    if snapshot.title:
        return snapshot.title
    if snapshot.description:
        return summarize(snapshot.description, 60)
    return snapshot.url


def render_results(
    matches: list[NuggetMatch], index: Index, archive: Archive
) -> str:
    """Spoken rendering of query results with {pause} markers.

    Phone values are read digit by digit; other kinds read their normalized
    text.  Results group per page in rank order; at most three pages are
    spoken, then "and more."
    """
    if not matches:
        return NO_MATCHES_PROMPT
    by_page: dict[str, list[NuggetMatch]] = {}
    for match in matches:
        by_page.setdefault(match.page_id, []).append(match)
    segments = []
    for page_id in list(by_page)[:3]:
        values = [
            speak_digits(m.normalized)
            if m.kind is NuggetKind.PHONE_NUMBER
            else m.normalized
            for m in by_page[page_id]
        ]
        if len(values) == 1:
            count_phrase = "there is one result"
        else:
            count_phrase = f"there are {_spell_count(len(values))} results"
        segments.append(
            f'On the page titled, "{_page_label(archive, page_id)}," '
            f"{count_phrase}, {{pause}}" + " {pause} ".join(values) + "."
        )
    spoken = "Now looking for matches. {pause}" + " {pause}".join(segments)
    if len(by_page) > 3:
        spoken += " {pause}and more."
    return spoken


def _candidate_listing(session: DialogSession) -> str:
    if not session.candidates:
        return NO_CANDIDATES_PROMPT
    parts = [
        f"Page {i}: {_page_label(session.archive, page_id)}."
        for i, page_id in enumerate(session.candidates[:3], 1)
    ]
    listing = " ".join(parts)
    if len(session.candidates) > 3:
        listing += " And more."
    return listing


def _confirm_prompt(session: DialogSession) -> str:
    assert session.kind_slot is not None
    return (
        f"Looking for {KIND_PLURALS[session.kind_slot]} on web pages with "
        f"{session.keywords_text}. Is this correct?"
    )


def _state_reprompt(session: DialogSession) -> str:
    if session.state in (DialogState.WELCOME, DialogState.COLLECT_KEYWORDS):
        return KEYWORD_PROMPT
    if session.state is DialogState.COLLECT_KIND:
        return KIND_PROMPT
    if session.state is DialogState.CONFIRM:
        return _confirm_prompt(session)
    if session.state is DialogState.RESULTS:
        return RESULTS_REPROMPT
    return _candidate_listing(session)


def _not_understood(session: DialogSession) -> str:
    return UNRECOGNIZED_PREFIX + " " + _state_reprompt(session)


def _fill_keywords(session: DialogSession, act: DialogAct) -> str:
    if act.type is ActType.SPOKEN_URL:
        session.keywords_slot = token_texts(act.url or "")
    else:
        session.keywords_slot = list(act.keywords)
    session.state = DialogState.COLLECT_KIND
    return KIND_PROMPT


def _run_query(session: DialogSession) -> tuple[str, list[NuggetMatch]]:
    assert session.keywords_slot and session.kind_slot
    pages = query_pages(session.index, session.keywords_slot)
    session.candidates = [m.page_id for m in pages]
    results = nuggets_on_pages(session.index, session.candidates, session.kind_slot)
    session.last_results = results
    session.state = DialogState.RESULTS
    return render_results(results, session.index, session.archive), results


def _answer_single_candidate(session: DialogSession) -> tuple[str, list[NuggetMatch]]:
    assert session.kind_slot is not None
    results = nuggets_on_pages(session.index, session.candidates, session.kind_slot)
    session.last_results = results
    session.state = DialogState.RESULTS
    return render_results(results, session.index, session.archive), results


def _refine(session: DialogSession, act: DialogAct) -> tuple[str, list[NuggetMatch] | None]:
    if act.type is ActType.KEYWORDS:
        matching = {m.page_id for m in query_pages(session.index, list(act.keywords))}
        session.candidates = [p for p in session.candidates if p in matching]
    elif act.type is ActType.CATEGORY_FILTER:
        session.category_filter = act.category
        tagged = session.annotations.pages_with_category(act.category or "")
        session.candidates = [p for p in session.candidates if p in tagged]
    elif act.type is ActType.SELECT_ORDINAL:
        assert act.ordinal is not None
        if not (1 <= act.ordinal <= len(session.candidates)):
            return _not_understood(session), None
        session.candidates = [session.candidates[act.ordinal - 1]]
    else:
        return _not_understood(session), None

    if len(session.candidates) == 1 and session.kind_slot is not None:
        return _answer_single_candidate(session)
    return _candidate_listing(session), None


def handle_utterance(
    session: DialogSession, utterance: str
) -> tuple[str, list[NuggetMatch] | None]:
    """Advance the session by one user turn; returns the system prompt and,
    when a query ran, its results."""
    if session.state is DialogState.DONE:
        raise SessionClosedError(f"session {session.session_id} is finished")

    act = classify_utterance(utterance, session.state)
    results: list[NuggetMatch] | None = None

    if act.type is ActType.START_OVER:
        session.keywords_slot = None
        session.keywords_text = ""
        session.kind_slot = None
        session.category_filter = None
        session.candidates = []
        session.last_results = None
        session.state = DialogState.COLLECT_KEYWORDS
        prompt = KEYWORD_PROMPT
    elif act.type is ActType.HELP:
        prompt = HELP_PROMPT
    elif session.state in (DialogState.WELCOME, DialogState.COLLECT_KEYWORDS):
        if act.type in (ActType.KEYWORDS, ActType.SPOKEN_URL):
            session.keywords_text = (
                act.url if act.type is ActType.SPOKEN_URL else _display_text(utterance)
            ) or ""
            prompt = _fill_keywords(session, act)
        else:
            prompt = _not_understood(session)
    elif session.state is DialogState.COLLECT_KIND:
        if act.type is ActType.INFO_KIND:
            session.kind_slot = act.kind
            session.state = DialogState.CONFIRM
            prompt = _confirm_prompt(session)
        else:
            prompt = _not_understood(session)
    elif session.state is DialogState.CONFIRM:
        if act.type is ActType.YES:
            prompt, results = _run_query(session)
        elif act.type is ActType.NO:
            session.keywords_slot = None
            session.keywords_text = ""
            session.kind_slot = None
            session.state = DialogState.COLLECT_KEYWORDS
            prompt = KEYWORD_PROMPT
        else:
            prompt = _not_understood(session)
    elif session.state is DialogState.RESULTS:
        if act.type is ActType.YES or (
            act.type is ActType.UNRECOGNIZED and not token_texts(utterance)
        ):
            session.state = DialogState.DONE
            prompt = GOODBYE_PROMPT
        elif act.type is ActType.KEYWORDS:
            session.state = DialogState.REFINE
            prompt, results = _refine(session, act)
        else:
            prompt = _not_understood(session)
    elif session.state is DialogState.REFINE:
        prompt, results = _refine(session, act)
    else:  # pragma: no cover - all states handled above
        prompt = _not_understood(session)

    session.transcript.append(("user", utterance))
    session.transcript.append(("system", prompt))
    return prompt, results


def export_transcript(session: DialogSession) -> str:
    """One line per turn: ``[n]<TAB><U|S><TAB><utterance>``."""
    lines = [
        f"[{i}]\t{'S' if speaker == 'system' else 'U'}\t{utterance}"
        for i, (speaker, utterance) in enumerate(session.transcript, 1)
    ]
    return "\n".join(lines)
