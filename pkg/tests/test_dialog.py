"""Dialog state machine tests: golden conversation, act classification,
refinement, and transcript invariants."""

import pytest

from refind.annotations import AnnotationKind, AnnotationStore
from refind.archive import Archive
from refind.dialog import (
    ActType,
    DialogState,
    GOODBYE_PROMPT,
    HELP_PROMPT,
    KEYWORD_PROMPT,
    KIND_PROMPT,
    NO_MATCHES_PROMPT,
    UNRECOGNIZED_PREFIX,
    WELCOME_PROMPT,
    classify_utterance,
    export_transcript,
    handle_utterance,
    render_results,
    start_session,
)
from refind.errors import SessionClosedError
from refind.extractor import NuggetKind
from refind.index import query_nuggets

from .conftest import indexed, make_page, ts

GOLDEN_FINAL = (
    'Now looking for matches. {pause}On the page titled, '
    '"Anytown Hotel Home Page," there is one result, '
    "{pause}five five five {pause} one two three four."
)

GOLDEN_PROMPTS = [
    "Welcome to the WebContext system. Please say some words to help identify the pages to search.",
    "What piece of information are you looking for?",
    "Looking for phone numbers on web pages with Anytown hotel. Is this correct?",
    GOLDEN_FINAL,
]

GOLDEN_UTTERANCES = ["Anytown hotel", "The phone number.", "Yes."]


def fresh_session(archive):
    store = AnnotationStore(archive)
    return start_session(indexed(archive), store)


def run_dialog(archive, utterances):
    session, prompt = fresh_session(archive)
    prompts = [prompt]
    for utterance in utterances:
        prompt, _results = handle_utterance(session, utterance)
        prompts.append(prompt)
    return session, prompts


class TestGoldenConversation:
    def test_prompts_byte_identical(self, anytown_archive):
        _, prompts = run_dialog(anytown_archive, GOLDEN_UTTERANCES)
        assert prompts == GOLDEN_PROMPTS

    def test_transcript_alternates(self, anytown_archive):
        session, _ = run_dialog(anytown_archive, GOLDEN_UTTERANCES)
        speakers = [speaker for speaker, _ in session.transcript]
        assert speakers == ["system", "user"] * 3 + ["system"]

    def test_deterministic_transcripts(self, anytown_archive):
        one, _ = run_dialog(anytown_archive, GOLDEN_UTTERANCES)
        two, _ = run_dialog(anytown_archive, GOLDEN_UTTERANCES)
        assert export_transcript(one) == export_transcript(two)
        assert one.session_id != two.session_id

    def test_export_format(self, anytown_archive):
        session, _ = run_dialog(anytown_archive, GOLDEN_UTTERANCES[:1])
        lines = export_transcript(session).split("\n")
        assert lines[0] == f"[1]\tS\t{WELCOME_PROMPT}"
        assert lines[1] == "[2]\tU\tAnytown hotel"
        assert lines[2] == f"[3]\tS\t{KIND_PROMPT}"


class TestStartSession:
    def test_exact_welcome(self, anytown_archive):
        session, prompt = fresh_session(anytown_archive)
        assert prompt == WELCOME_PROMPT
        assert session.state is DialogState.COLLECT_KEYWORDS

    def test_distinct_ids_same_prompt(self, anytown_archive):
        a, prompt_a = fresh_session(anytown_archive)
        b, prompt_b = fresh_session(anytown_archive)
        assert a.session_id != b.session_id
        assert prompt_a == prompt_b

    def test_single_system_entry(self, anytown_archive):
        session, _ = fresh_session(anytown_archive)
        assert session.transcript == [("system", WELCOME_PROMPT)]


class TestClassify:
    def test_kind_phrase(self):
        act = classify_utterance("The phone number.", DialogState.COLLECT_KIND)
        assert act.type is ActType.INFO_KIND
        assert act.kind is NuggetKind.PHONE_NUMBER

    def test_yes(self):
        assert classify_utterance("Yes.", DialogState.CONFIRM).type is ActType.YES

    def test_spoken_url(self):
        act = classify_utterance("Fandango dot com", DialogState.COLLECT_KEYWORDS)
        assert act.type is ActType.SPOKEN_URL
        assert act.url == "fandango.com"

    @pytest.mark.parametrize(
        "utterance,act_type",
        [
            ("yeah", ActType.YES),
            ("correct", ActType.YES),
            ("Nope.", ActType.NO),
            ("start over", ActType.START_OVER),
            ("help", ActType.HELP),
            ("category restaurants", ActType.CATEGORY_FILTER),
            ("", ActType.UNRECOGNIZED),
            ("?!", ActType.UNRECOGNIZED),
        ],
    )
    def test_lexicons(self, utterance, act_type):
        assert classify_utterance(utterance, DialogState.CONFIRM).type is act_type

    def test_kind_phrase_outside_collect_kind_is_keywords(self):
        act = classify_utterance("The phone number.", DialogState.COLLECT_KEYWORDS)
        assert act.type is ActType.KEYWORDS

    def test_ordinals_only_in_refine(self):
        assert (
            classify_utterance("the first one", DialogState.REFINE).type
            is ActType.SELECT_ORDINAL
        )
        assert (
            classify_utterance("the first one", DialogState.COLLECT_KEYWORDS).type
            is ActType.KEYWORDS
        )

    @pytest.mark.parametrize(
        "utterance,n",
        [("the first one", 1), ("second", 2), ("number two", 2), ("number 3", 3)],
    )
    def test_ordinal_values(self, utterance, n):
        assert classify_utterance(utterance, DialogState.REFINE).ordinal == n

    def test_category_payload(self):
        act = classify_utterance("category matinee", DialogState.REFINE)
        assert act.category == "matinee"

    def test_showtimes_phrase(self):
        act = classify_utterance("showtimes", DialogState.COLLECT_KIND)
        assert act.kind is NuggetKind.TIME

    def test_totality_over_random_text(self):
        for junk in ["...", "@#$", "the the the", "42", "dot com"]:
            for state in DialogState:
                act = classify_utterance(junk, state)
                assert act.type in ActType


class TestConfirmBranches:
    def test_no_resets_slots(self, anytown_archive):
        session, prompts = run_dialog(
            anytown_archive, ["Anytown hotel", "The phone number.", "No."]
        )
        assert session.state is DialogState.COLLECT_KEYWORDS
        assert session.keywords_slot is None
        assert session.kind_slot is None
        assert prompts[-1] == KEYWORD_PROMPT

    def test_unrecognized_in_confirm_reprompts(self, anytown_archive):
        session, prompts = run_dialog(
            anytown_archive, ["Anytown hotel", "The phone number.", "splendid"]
        )
        assert session.state is DialogState.CONFIRM
        assert prompts[-1].startswith(UNRECOGNIZED_PREFIX)
        assert "Is this correct?" in prompts[-1]

    def test_slots_filled_before_query(self, anytown_archive):
        session, _ = run_dialog(anytown_archive, ["Anytown hotel", "The phone number."])
        assert session.state is DialogState.CONFIRM
        assert session.keywords_slot == ["anytown", "hotel"]
        assert session.kind_slot is NuggetKind.PHONE_NUMBER
        assert session.last_results is None  # query only after explicit yes


class TestResultsAndDone:
    def test_yes_after_results_ends(self, anytown_archive):
        session, prompts = run_dialog(
            anytown_archive, GOLDEN_UTTERANCES + ["Yes."]
        )
        assert session.state is DialogState.DONE
        assert prompts[-1] == GOODBYE_PROMPT

    def test_silence_after_results_ends(self, anytown_archive):
        session, prompts = run_dialog(anytown_archive, GOLDEN_UTTERANCES + [""])
        assert session.state is DialogState.DONE

    def test_utterance_after_done_rejected(self, anytown_archive):
        session, _ = run_dialog(anytown_archive, GOLDEN_UTTERANCES + ["Yes."])
        with pytest.raises(SessionClosedError):
            handle_utterance(session, "hello?")

    def test_no_matches_prompt(self, anytown_archive):
        session, prompts = run_dialog(
            anytown_archive, ["zebra zebra", "the phone number", "yes"]
        )
        assert prompts[-1] == NO_MATCHES_PROMPT
        assert session.state is DialogState.RESULTS


class TestStartOverAndHelp:
    def test_start_over_resets(self, anytown_archive):
        session, prompts = run_dialog(
            anytown_archive, ["Anytown hotel", "start over"]
        )
        assert session.state is DialogState.COLLECT_KEYWORDS
        assert session.keywords_slot is None
        assert prompts[-1] == KEYWORD_PROMPT

    def test_help_preserves_state(self, anytown_archive):
        session, prompts = run_dialog(anytown_archive, ["Anytown hotel", "help"])
        assert prompts[-1] == HELP_PROMPT
        assert session.state is DialogState.COLLECT_KIND


class TestSpokenUrlPath:
    def test_url_fills_keyword_slot_with_host_tokens(self, tmp_path):
        archive = Archive(tmp_path / "a")
        archive.ingest_page(
            "http://fandango.example/", make_page("Fandango Films", "showtimes 7:15 pm"),
            ts(1),
        )
        session, _ = fresh_session(archive)
        prompt, _ = handle_utterance(session, "Fandango dot com")
        assert session.keywords_slot == ["fandango", "com"]
        assert session.keywords_text == "fandango.com"
        assert prompt == KIND_PROMPT


def refinement_archive(tmp_path):
    archive = Archive(tmp_path / "a")
    archive.ingest_page(
        "http://east.example/grill",
        make_page("Harbor Grill East", "restaurant harbor dinner call 555-1111"),
        ts(1),
    )
    archive.ingest_page(
        "http://west.example/grill",
        make_page("Harbor Grill West", "restaurant harbor sunset call 555-2222"),
        ts(2),
    )
    archive.ingest_page(
        "http://north.example/cafe",
        make_page("Harbor Cafe", "cafe harbor brunch call 555-3333"),
        ts(3),
    )
    return archive


class TestRefinement:
    def seed_results(self, archive):
        session, _ = fresh_session(archive)
        for utterance in ["harbor", "the phone number", "yes"]:
            handle_utterance(session, utterance)
        assert session.state is DialogState.RESULTS
        assert len(session.candidates) == 3
        return session

    def test_keywords_narrow_candidates(self, tmp_path):
        session = self.seed_results(refinement_archive(tmp_path))
        before = list(session.candidates)
        prompt, results = handle_utterance(session, "grill")
        assert session.state in (DialogState.REFINE, DialogState.RESULTS)
        assert set(session.candidates) <= set(before)
        assert len(session.candidates) == 2
        assert prompt.startswith("Page 1: ")

    def test_ordinal_pick_answers(self, tmp_path):
        session = self.seed_results(refinement_archive(tmp_path))
        handle_utterance(session, "grill")
        prompt, results = handle_utterance(session, "the first one")
        assert session.state is DialogState.RESULTS
        assert results is not None and len(results) == 1
        assert "there is one result" in prompt

    def test_single_candidate_answers_directly(self, tmp_path):
        session = self.seed_results(refinement_archive(tmp_path))
        prompt, results = handle_utterance(session, "sunset")
        assert session.state is DialogState.RESULTS
        assert [m.normalized for m in results] == ["555-2222"]

    def test_category_filter_narrows(self, tmp_path):
        archive = refinement_archive(tmp_path)
        store = AnnotationStore(archive)
        east = archive.page_ids()[0]
        store.add_annotation(east, AnnotationKind.DRAWING, "circled",
                             category="restaurants", created_at=ts(4))
        session, _ = start_session(indexed(archive), store)
        for utterance in ["harbor", "the phone number", "yes"]:
            handle_utterance(session, utterance)
        prompt, results = handle_utterance(session, "grill")
        assert len(session.candidates) == 2
        prompt, results = handle_utterance(session, "category restaurants")
        assert session.candidates == [east]
        assert results is not None
        assert session.category_filter == "restaurants"

    def test_refinement_monotone(self, tmp_path):
        session = self.seed_results(refinement_archive(tmp_path))
        previous = list(session.candidates)
        for utterance in ["grill", "harbor", "east"]:
            if session.state is DialogState.DONE:
                break
            handle_utterance(session, utterance)
            assert set(session.candidates) <= set(previous)
            previous = list(session.candidates)

    def test_ordinal_out_of_range_reprompts(self, tmp_path):
        session = self.seed_results(refinement_archive(tmp_path))
        handle_utterance(session, "grill")
        prompt, _ = handle_utterance(session, "number 9")
        assert prompt.startswith(UNRECOGNIZED_PREFIX)
        assert len(session.candidates) == 2


class TestRenderResults:
    def test_zero(self, anytown_index, anytown_archive):
        assert render_results([], anytown_index, anytown_archive) == NO_MATCHES_PROMPT

    def test_one_phone(self, anytown_index, anytown_archive):
        matches = query_nuggets(
            anytown_index, ["anytown", "hotel"], NuggetKind.PHONE_NUMBER
        )
        assert render_results(matches, anytown_index, anytown_archive) == GOLDEN_FINAL

    def test_two_results_pluralized(self, tmp_path):
        archive = Archive(tmp_path / "a")
        archive.ingest_page(
            "http://a.example/",
            make_page("Two Phones", "call 555-1111 or 555-2222"),
            ts(1),
        )
        index = indexed(archive)
        matches = query_nuggets(index, ["phones"], NuggetKind.PHONE_NUMBER)
        rendered = render_results(matches, index, archive)
        assert rendered == (
            'Now looking for matches. {pause}On the page titled, "Two Phones," '
            "there are two results, {pause}five five five {pause} one one one one "
            "{pause} five five five {pause} two two two two."
        )

    def test_more_than_three_pages_truncated(self, tmp_path):
        archive = Archive(tmp_path / "a")
        for i in range(5):
            archive.ingest_page(
                f"http://h{i}.example/",
                make_page(f"Spot {i}", f"shared words call 555-000{i}"),
                ts(i + 1),
            )
        index = indexed(archive)
        matches = query_nuggets(index, ["shared"], NuggetKind.PHONE_NUMBER)
        rendered = render_results(matches, index, archive)
        assert rendered.endswith("and more.")
        assert rendered.count("On the page titled") == 3
