"""Speech-grammar and voice-dialog document generation.

Grammars are built from the index vocabulary and serialized as an SRGS-XML
1.0 subset; the dialog document realizes the slot-filling flow as a
VoiceXML 2.0 subset with one form holding two input fields plus a
confirmation field.  Serialization is deterministic: UTF-8, 2-space
indentation, fixed attribute order, so output is byte-identical across
runs.  A parser for the emitted grammar subset is included so documents can
be round-tripped in tests.

The grammar model is small: a rule maps to alternatives, each alternative
is a sequence of items, and an item is either a lowercase terminal token or
a reference written ``$rulename``.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from .dialog import KIND_PROMPT, WELCOME_PROMPT
from .errors import EmptyGrammarError, MalformedGrammarError
from .extractor import token_texts
from .index import Index, vocabulary

SRGS_NS = "http://www.w3.org/2001/06/grammar"
VXML_NS = "http://www.w3.org/2001/vxml"
PAUSE_BREAK_MS = 300
MAX_KEYWORD_TOKENS = 5

_TERMINAL_RE = re.compile(r"[a-z0-9]+$")


def ref(rule_name: str) -> str:
    return "$" + rule_name


def is_ref(item: str) -> bool:
    return item.startswith("$")


@dataclass
class Grammar:
    root: str
    rules: dict[str, list[list[str]]]
    mode: str = "voice"


def validate_grammar(grammar: Grammar) -> None:
    """Check structural invariants; raises MalformedGrammarError."""
    if grammar.root not in grammar.rules:
        raise MalformedGrammarError(f"missing root rule {grammar.root!r}")
    for name, alternatives in grammar.rules.items():
        if not alternatives:
            raise MalformedGrammarError(f"rule {name!r} has no alternatives")
        for alt in alternatives:
            if not alt:
                raise MalformedGrammarError(f"rule {name!r} has an empty alternative")
            for item in alt:
                if is_ref(item):
                    if item[1:] not in grammar.rules:
                        raise MalformedGrammarError(
                            f"rule {name!r} references unknown rule {item[1:]!r}"
                        )
                elif not _TERMINAL_RE.fullmatch(item):
                    raise MalformedGrammarError(
                        f"terminal {item!r} is not a lowercase token"
                    )
    # no left recursion: no cycle through first-position references
    def first_refs(name: str) -> list[str]:
        return [
            alt[0][1:] for alt in grammar.rules[name] if is_ref(alt[0])
        ]

    for start in grammar.rules:
        stack, seen = [start], set()
        while stack:
            name = stack.pop()
            for nxt in first_refs(name):
                if nxt == start:
                    raise MalformedGrammarError(f"left recursion through {start!r}")
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)


def generate_keyword_grammar(index: Index) -> Grammar:
    """Keyword grammar: one to five repetitions of a token rule covering the
    vocabulary plus adjacent bigram phrases from page titles."""
    vocab = vocabulary(index)
    if not vocab:
        raise EmptyGrammarError("index vocabulary is empty")
    alternatives: list[list[str]] = [[t] for t in vocab]
    bigrams = sorted(
        {
            (tokens[i], tokens[i + 1])
            for tokens in index.titles.values()
            for i in range(len(tokens) - 1)
        }
    )
    alternatives.extend([a, b] for a, b in bigrams)
    rules = {
        "keywords": [["$token"] * n for n in range(1, MAX_KEYWORD_TOKENS + 1)],
        "token": alternatives,
    }
    grammar = Grammar(root="keywords", rules=rules)
    validate_grammar(grammar)
    return grammar


_KIND_PHRASE_ORDER = [
    "phone number", "phone numbers", "address", "addresses",
    "price", "prices", "time", "times", "showtime", "showtimes",
]


def generate_kind_grammar() -> Grammar:
    """Information-kind grammar: each kind phrase with an optional leading
    "the"."""
    alternatives: list[list[str]] = []
    for phrase in _KIND_PHRASE_ORDER:
        words = phrase.split()
        alternatives.append(["the"] + words)
        alternatives.append(words)
    grammar = Grammar(root="kind", rules={"kind": alternatives})
    validate_grammar(grammar)
    return grammar


def grammar_accepts(grammar: Grammar, utterance: str) -> bool:
    """True iff the utterance's token sequence derives from the root rule."""
    tokens = token_texts(utterance)
    if not tokens:
        return False
    memo: dict[tuple[str, int], set[int]] = {}

    def derive(rule: str, start: int) -> set[int]:
        key = (rule, start)
        if key in memo:
            return memo[key]
        memo[key] = set()  # cycle guard; no left recursion by invariant
        ends: set[int] = set()
        for alt in grammar.rules[rule]:
            positions = {start}
            for item in alt:
                nxt: set[int] = set()
                for pos in positions:
                    if is_ref(item):
                        nxt |= derive(item[1:], pos)
                    elif pos < len(tokens) and tokens[pos] == item:
                        nxt.add(pos + 1)
                positions = nxt
                if not positions:
                    break
            ends |= positions
        memo[key] = ends
        return ends

    return len(tokens) in derive(grammar.root, 0)


# -- documents ---------------------------------------------------------------

@dataclass(frozen=True)
class VoiceDocument:
    content: bytes
    kind: str  # "grammar" or "dialog"


@dataclass(frozen=True)
class DialogField:
    name: str
    prompt: str
    grammar_src: str


@dataclass(frozen=True)
class DialogDocument:
    form_id: str
    fields: tuple[DialogField, ...]
    confirm: DialogField


def build_dialog_document(grammar_dir: str = "../grammars") -> DialogDocument:
    """The slot-filling dialog as a document: keyword and kind input fields
    plus one confirmation field."""
    return DialogDocument(
        form_id="webcontext",
        fields=(
            DialogField("keywords", WELCOME_PROMPT, f"{grammar_dir}/keywords.grxml"),
            DialogField("kind", KIND_PROMPT, f"{grammar_dir}/kind.grxml"),
        ),
        confirm=DialogField("confirm", "Is this correct?", "builtin:grammar/boolean"),
    )


def _prompt_markup(text: str) -> str:
    """Escape prompt text, rendering {pause} as a break element."""
    parts = text.split("{pause}")
    breaker = f'<break time="{PAUSE_BREAK_MS}ms"/>'
    return breaker.join(escape(part) for part in parts)


def serialize(document: Grammar | DialogDocument) -> VoiceDocument:
    """Deterministic byte serialization of a grammar or dialog document."""
    if isinstance(document, Grammar):
        return _serialize_grammar(document)
    if isinstance(document, DialogDocument):
        return _serialize_dialog(document)
    raise MalformedGrammarError(f"cannot serialize {type(document).__name__}")


def _serialize_grammar(grammar: Grammar) -> VoiceDocument:
    validate_grammar(grammar)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<grammar xmlns={quoteattr(SRGS_NS)} version="1.0" xml:lang="en-US"'
        f" mode={quoteattr(grammar.mode)} root={quoteattr(grammar.root)}>",
    ]
    names = [grammar.root] + sorted(n for n in grammar.rules if n != grammar.root)
    for name in names:
        scope = ' scope="public"' if name == grammar.root else ""
        lines.append(f"  <rule id={quoteattr(name)}{scope}>")
        lines.append("    <one-of>")
        for alt in grammar.rules[name]:
            lines.append("      <item>")
            for item in alt:
                if is_ref(item):
                    lines.append(f"        <ruleref uri={quoteattr('#' + item[1:])}/>")
                else:
                    lines.append(f"        <token>{escape(item)}</token>")
            lines.append("      </item>")
        lines.append("    </one-of>")
        lines.append("  </rule>")
    lines.append("</grammar>")
    return VoiceDocument(("\n".join(lines) + "\n").encode("utf-8"), "grammar")


def _serialize_dialog(document: DialogDocument) -> VoiceDocument:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<vxml xmlns={quoteattr(VXML_NS)} version="2.0" xml:lang="en-US">',
        f"  <form id={quoteattr(document.form_id)}>",
    ]
    for f in document.fields + (document.confirm,):
        lines.append(f"    <field name={quoteattr(f.name)}>")
        lines.append(f"      <prompt>{_prompt_markup(f.prompt)}</prompt>")
        lines.append(f"      <grammar src={quoteattr(f.grammar_src)}/>")
        lines.append("    </field>")
    lines.append("  </form>")
    lines.append("</vxml>")
    return VoiceDocument(("\n".join(lines) + "\n").encode("utf-8"), "dialog")


def parse_grammar(document: VoiceDocument | bytes) -> Grammar:
    """Parse a document produced by serialize back into the grammar model."""
    data = document.content if isinstance(document, VoiceDocument) else document
    try:
        root_el = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedGrammarError(f"not well-formed XML: {exc}") from None
    if root_el.tag != f"{{{SRGS_NS}}}grammar":
        raise MalformedGrammarError(f"not a grammar document: {root_el.tag}")
    grammar = Grammar(
        root=root_el.get("root", ""),
        rules={},
        mode=root_el.get("mode", "voice"),
    )
    for rule_el in root_el:
        if rule_el.tag != f"{{{SRGS_NS}}}rule":
            raise MalformedGrammarError(f"unexpected element {rule_el.tag}")
        alternatives: list[list[str]] = []
        (one_of,) = list(rule_el)
        for item_el in one_of:
            alt: list[str] = []
            for child in item_el:
                if child.tag == f"{{{SRGS_NS}}}token":
                    alt.append(child.text or "")
                elif child.tag == f"{{{SRGS_NS}}}ruleref":
                    alt.append("$" + (child.get("uri") or "").lstrip("#"))
                else:
                    raise MalformedGrammarError(f"unexpected element {child.tag}")
            alternatives.append(alt)
        grammar.rules[rule_el.get("id", "")] = alternatives
    validate_grammar(grammar)
    return grammar


def write_voice_documents(index: Index, outdir: str | Path) -> list[Path]:
    """Emit keyword/kind grammars and the dialog document under outdir."""
    outdir = Path(outdir)
    (outdir / "grammars").mkdir(parents=True, exist_ok=True)
    (outdir / "dialog").mkdir(parents=True, exist_ok=True)
    written = []
    for relpath, doc in [
        ("grammars/keywords.grxml", serialize(generate_keyword_grammar(index))),
        ("grammars/kind.grxml", serialize(generate_kind_grammar())),
        ("dialog/webcontext.vxml", serialize(build_dialog_document())),
    ]:
        path = outdir / relpath
        path.write_bytes(doc.content)
        written.append(path)
    return written
