"""refind: archive web pages, extract fact nuggets, and re-find them through
a deterministic voice-style dialog."""

from .annotations import Annotation, AnnotationKind, AnnotationStore, Category
from .archive import Archive, PageSnapshot, VisitEvent, Waypoint
from .dialog import (
    DialogSession,
    DialogState,
    classify_utterance,
    export_transcript,
    handle_utterance,
    render_results,
    start_session,
)
from .errors import (
    ConflictError,
    ConsistencyError,
    EmptyGrammarError,
    MalformedGrammarError,
    MalformedInputError,
    MalformedQueryError,
    NotFoundError,
    RefindError,
    SessionClosedError,
)
from .extractor import (
    Nugget,
    NuggetKind,
    Span,
    Token,
    extract_addresses,
    extract_nuggets,
    extract_phones,
    extract_prices,
    extract_times,
    parse_spoken_digits,
    parse_spoken_url,
    speak_digits,
    tokenize,
)
from .index import (
    Index,
    NuggetMatch,
    PageMatch,
    build_index,
    query_nuggets,
    query_pages,
    vocabulary,
)
from .voicegen import (
    Grammar,
    VoiceDocument,
    generate_keyword_grammar,
    generate_kind_grammar,
    grammar_accepts,
    parse_grammar,
    serialize,
    write_voice_documents,
)

__version__ = "0.1.0"
