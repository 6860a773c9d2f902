"""Usage statistics over coded re-finding conversations.

A coded corpus is a JSON array of conversation records; each record carries
the task number and two lists of references: waypoint references (mentions
of URLs, titles, or page descriptions) and annotation references (mentions
of category names, annotation types, or the annotation feature in general),
each attributed to the User or the Retriever speaker.

The tallies aggregate counts per speaker and kind with percentages of the
speaker's column total (one decimal, half-up rounding), and the summary
reports incidence, per-conversation mean, and sample standard deviation
(n-1 denominator).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from enum import Enum
from pathlib import Path

from .errors import MalformedInputError

SPEAKERS = ("User", "Retriever")
WAYPOINT_KINDS = ("Url", "Title", "Description")
ANNOTATION_KINDS = ("Category", "Type", "GeneralRef")
TASK_RANGE = (1, 4)


class Speaker(str, Enum):
    USER = "User"
    RETRIEVER = "Retriever"


@dataclass(frozen=True)
class CodedConversation:
    conversation_id: str
    task: int
    waypoint_refs: tuple[tuple[str, str], ...]  # (speaker, kind)
    annotation_refs: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class SpeakerColumn:
    counts: dict[str, int]
    percentages: dict[str, float]
    total: int


@dataclass(frozen=True)
class UsageTable:
    kinds: tuple[str, ...]
    columns: dict[str, SpeakerColumn]  # keyed by speaker


@dataclass(frozen=True)
class RefSummary:
    conversations: int
    with_refs: int
    incidence_pct: float  # one decimal
    mean: float  # two decimals
    stdev: float  # two decimals


@dataclass(frozen=True)
class ConversationSummary:
    waypoints: RefSummary
    annotations: RefSummary


def _round(value: float, places: str) -> float:
    return float(Decimal(repr(value)).quantize(Decimal(places), rounding=ROUND_HALF_UP))


def _percent(count: int, total: int) -> float:
    if total == 0:
        return 0.0
    return float(
        (Decimal(count) * 100 / Decimal(total)).quantize(
            Decimal("0.1"), rounding=ROUND_HALF_UP
        )
    )


def _check_refs(
    refs: object, kinds: tuple[str, ...], where: str
) -> tuple[tuple[str, str], ...]:
    if not isinstance(refs, list):
        raise MalformedInputError(f"{where}: expected a list of references")
    out = []
    for j, ref in enumerate(refs):
        if not isinstance(ref, dict):
            raise MalformedInputError(f"{where}, ref {j}: expected an object")
        speaker, kind = ref.get("speaker"), ref.get("kind")
        if speaker not in SPEAKERS:
            raise MalformedInputError(
                f"{where}, ref {j}: speaker must be one of {SPEAKERS}, got {speaker!r}"
            )
        if kind not in kinds:
            raise MalformedInputError(
                f"{where}, ref {j}: kind must be one of {kinds}, got {kind!r}"
            )
        out.append((speaker, kind))
    return tuple(out)


def load_coded_corpus(path: str | Path) -> list[CodedConversation]:
    """Load and validate a coded-conversation file.

    Violations raise MalformedInputError naming the offending record.
    """
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise MalformedInputError(f"{path}: expected a top-level array")
    corpus = []
    for i, rec in enumerate(raw):
        where = f"conversation {i}"
        if not isinstance(rec, dict):
            raise MalformedInputError(f"{where}: expected an object")
        task = rec.get("task")
        if not isinstance(task, int) or not TASK_RANGE[0] <= task <= TASK_RANGE[1]:
            raise MalformedInputError(
                f"{where}: task must be an integer in "
                f"{TASK_RANGE[0]}..{TASK_RANGE[1]}, got {task!r}"
            )
        corpus.append(
            CodedConversation(
                conversation_id=str(rec.get("conversation_id", f"c{i + 1:02d}")),
                task=task,
                waypoint_refs=_check_refs(
                    rec.get("waypoint_refs", []), WAYPOINT_KINDS, where
                ),
                annotation_refs=_check_refs(
                    rec.get("annotation_refs", []), ANNOTATION_KINDS, where
                ),
            )
        )
    return corpus


def _tally(
    corpus: list[CodedConversation], attr: str, kinds: tuple[str, ...]
) -> UsageTable:
    columns = {}
    for speaker in SPEAKERS:
        counts = {kind: 0 for kind in kinds}
        for conversation in corpus:
            for ref_speaker, ref_kind in getattr(conversation, attr):
                if ref_speaker == speaker:
                    counts[ref_kind] += 1
        total = sum(counts.values())
        columns[speaker] = SpeakerColumn(
            counts=counts,
            percentages={k: _percent(counts[k], total) for k in kinds},
            total=total,
        )
    return UsageTable(kinds=kinds, columns=columns)


def tally_waypoints(corpus: list[CodedConversation]) -> UsageTable:
    return _tally(corpus, "waypoint_refs", WAYPOINT_KINDS)


def tally_annotations(corpus: list[CodedConversation]) -> UsageTable:
    return _tally(corpus, "annotation_refs", ANNOTATION_KINDS)


def _summarize_refs(per_conversation: list[int]) -> RefSummary:
    n = len(per_conversation)
    with_refs = sum(1 for c in per_conversation if c > 0)
    if n == 0:
        return RefSummary(0, 0, 0.0, 0.0, 0.0)
    mean = sum(per_conversation) / n
    if n > 1:
        variance = sum((c - mean) ** 2 for c in per_conversation) / (n - 1)
        stdev = math.sqrt(variance)
    else:
        stdev = 0.0
    return RefSummary(
        conversations=n,
        with_refs=with_refs,
        incidence_pct=_percent(with_refs, n),
        mean=_round(mean, "0.01"),
        stdev=_round(stdev, "0.01"),
    )


def conversation_summary(corpus: list[CodedConversation]) -> ConversationSummary:
    return ConversationSummary(
        waypoints=_summarize_refs([len(c.waypoint_refs) for c in corpus]),
        annotations=_summarize_refs([len(c.annotation_refs) for c in corpus]),
    )


# -- rendering ---------------------------------------------------------------

def usage_table_to_dict(table: UsageTable) -> dict:
    return {
        "kinds": list(table.kinds),
        "columns": {
            speaker: {
                "counts": dict(col.counts),
                "percentages": dict(col.percentages),
                "total": col.total,
            }
            for speaker, col in table.columns.items()
        },
    }


def summary_to_dict(summary: ConversationSummary) -> dict:
    return {
        name: {
            "conversations": part.conversations,
            "with_refs": part.with_refs,
            "incidence_pct": part.incidence_pct,
            "mean": part.mean,
            "stdev": part.stdev,
        }
        for name, part in (
            ("waypoints", summary.waypoints),
            ("annotations", summary.annotations),
        )
    }


def render_usage_table(table: UsageTable, title: str) -> str:
    lines = [f"{title} ({' / '.join(table.kinds)})"]
    for speaker in SPEAKERS:
        col = table.columns[speaker]
        cells = " / ".join(
            f"{col.counts[k]} {col.percentages[k]:.1f}%" for k in table.kinds
        )
        lines.append(f"  {speaker}s: {cells} (total {col.total})")
    return "\n".join(lines)


def render_summary(summary: ConversationSummary) -> str:
    lines = ["Conversation summary"]
    for name, part in (
        ("waypoints", summary.waypoints),
        ("annotations", summary.annotations),
    ):
        lines.append(
            f"  {name}: {part.with_refs}/{part.conversations} conversations "
            f"({part.incidence_pct:.1f}%), mean {part.mean:.2f}, "
            f"stdev {part.stdev:.2f}"
        )
    return "\n".join(lines)


def fixture_corpus_path() -> Path:
    """Path of the bundled reference corpus."""
    return Path(__file__).parent / "data" / "coded_corpus.json"
