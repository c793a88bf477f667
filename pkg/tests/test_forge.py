"""Forge pipeline tests: templates, client orchestration, parsing,
conversion, split composition, and corpus statistics."""

from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest

import requests

from aqalab.data import QAQuadruple
from aqalab.errors import (
    ConfigError,
    MalformedResponse,
    ParseError,
    RateLimited,
    SchemaError,
    TemplateError,
    TransportError,
)
from aqalab.forge import (
    CAPTION_QUESTIONS,
    ClientConfig,
    HttpLLMClient,
    MockLLMClient,
    PromptTemplate,
    call_llm,
    compose_splits,
    composition_report,
    compute_stats,
    convert_existing,
    extract_options,
    get_template,
    load_generation_log,
    parse_qa,
    render_prompt,
    run_generation,
    words,
)
from aqalab.forge.templates import DATA_TYPES, FORMAT_FOOTER, KINDS

DATA_DIR = Path(__file__).parent / "data"

WIND_DETAIL = (DATA_DIR / "transcript_wind_detail.txt").read_text(encoding="utf-8")
WIND_MCQ = (DATA_DIR / "transcript_wind_mcq.txt").read_text(encoding="utf-8")


class TestTemplates:
    def test_registry_covers_all_combos(self):
        for dt in DATA_TYPES:
            for kind in KINDS:
                tpl = get_template(dt, kind)
                tpl.validate()
                assert tpl.data_type == dt and tpl.kind == kind

    def test_unknown_combo_rejected(self):
        with pytest.raises(TemplateError):
            get_template("type9", "detail")

    def test_render_matches_golden_files(self):
        for dt in DATA_TYPES:
            for kind in KINDS:
                system, user = render_prompt(get_template(dt, kind), "a dog barks")
                golden = (DATA_DIR / f"golden_prompt_{dt}_{kind}.txt").read_text(
                    encoding="utf-8")
                assert golden == (
                    "=== SYSTEM ===\n" + system + "\n=== USER ===\n" + user + "\n"
                ), f"golden drift for ({dt}, {kind})"

    def test_caption_lands_verbatim(self):
        system, user = render_prompt(get_template("type1", "detail"), "rain falls")
        assert user.startswith("Caption: rain falls\n")
        assert "{caption}" not in user

    def test_braces_in_caption_are_not_expanded(self):
        tricky = "a {weird} clip with {caption} inside"
        _, user = render_prompt(get_template("type1", "mcq"), tricky)
        assert tricky in user
        # the placeholder text itself, arriving via the caption, must survive
        assert user.count("{caption}") == 1

    def test_empty_caption_rejected(self):
        with pytest.raises(TemplateError):
            render_prompt(get_template("type1", "detail"), "")

    def test_types_two_and_three_share_text(self):
        for kind in KINDS:
            t2 = get_template("type2", kind)
            t3 = get_template("type3", kind)
            assert t2.system_text == t3.system_text
            assert t2.user_text == t3.user_text

    def test_all_user_texts_end_with_format_footer(self):
        for dt in DATA_TYPES:
            for kind in KINDS:
                assert get_template(dt, kind).user_text.endswith(FORMAT_FOOTER)

    def test_placeholder_count_enforced(self):
        bad = PromptTemplate("type1", "detail", "s", "no placeholder here")
        with pytest.raises(TemplateError):
            bad.validate()
        doubled = PromptTemplate("type1", "detail", "s", "{caption} and {caption}")
        with pytest.raises(TemplateError):
            doubled.validate()


def _user_for(caption: str) -> str:
    return f"Caption: {caption}\n\nWrite 5 pairs.\n\n" + FORMAT_FOOTER


class TestCallLlm:
    def test_mock_returns_canned_transcript(self):
        client = MockLLMClient({"dog": "Q: q?\nA: a."})
        cfg = ClientConfig(backoff_s=0.0)
        out = call_llm(client, "sys", _user_for("dog"), cfg)
        assert out == "Q: q?\nA: a."
        assert client.calls == 1

    def test_two_failures_then_success_logs_three_attempts(self):
        client = MockLLMClient(
            {"dog": "Q: q?\nA: a."},
            scripted_failures=[TransportError("t1"), RateLimited("t2")])
        cfg = ClientConfig(max_attempts=3, backoff_s=0.001)
        log: list = []
        out = call_llm(client, "sys", _user_for("dog"), cfg, attempt_log=log)
        assert out == "Q: q?\nA: a."
        assert log == [("retryable", 1), ("retryable", 2), ("ok", 3)]
        assert client.calls == 3

    def test_exhausted_retries_raise_last_error(self):
        client = MockLLMClient({}, scripted_failures=[
            TransportError("a"), TransportError("b"), TransportError("c")])
        cfg = ClientConfig(max_attempts=3, backoff_s=0.0)
        with pytest.raises(TransportError, match="c"):
            call_llm(client, "sys", _user_for("dog"), cfg)
        assert client.calls == 3

    def test_malformed_response_is_not_retried(self):
        client = MockLLMClient({}, scripted_failures=[MalformedResponse("bad")])
        cfg = ClientConfig(max_attempts=3, backoff_s=0.0)
        with pytest.raises(MalformedResponse):
            call_llm(client, "sys", _user_for("dog"), cfg)
        assert client.calls == 1

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            ClientConfig(max_concurrency=0).validate()
        with pytest.raises(ConfigError):
            ClientConfig(max_attempts=0).validate()


class _FakeResponse:
    def __init__(self, status_code=200, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        if self._payload is None:
            raise ValueError("not json")
        return self._payload


class TestHttpClient:
    def _client(self):
        return HttpLLMClient(ClientConfig(endpoint="http://llm.test/v1"))

    def test_endpoint_required(self):
        with pytest.raises(ConfigError):
            HttpLLMClient(ClientConfig(endpoint=""))

    def test_success_extracts_message_content(self, monkeypatch):
        payload = {"choices": [{"message": {"content": "Q: q?\nA: a."}}]}
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(url=url, body=json, headers=headers, timeout=timeout)
            return _FakeResponse(200, payload)

        monkeypatch.setattr(requests, "post", fake_post)
        monkeypatch.setenv("AQALAB_LLM_TOKEN", "sekrit")
        out = self._client().complete("sys", "user text")
        assert out == "Q: q?\nA: a."
        assert seen["url"] == "http://llm.test/v1"
        assert seen["headers"]["Authorization"] == "Bearer sekrit"
        assert seen["body"]["messages"][0] == {"role": "system", "content": "sys"}

    def test_no_token_no_auth_header(self, monkeypatch):
        payload = {"choices": [{"message": {"content": "x"}}]}
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(headers=headers)
            return _FakeResponse(200, payload)

        monkeypatch.setattr(requests, "post", fake_post)
        monkeypatch.delenv("AQALAB_LLM_TOKEN", raising=False)
        self._client().complete("sys", "user")
        assert "Authorization" not in seen["headers"]

    def test_429_maps_to_rate_limited(self, monkeypatch):
        monkeypatch.setattr(requests, "post",
                            lambda *a, **k: _FakeResponse(429, text="slow down"))
        with pytest.raises(RateLimited):
            self._client().complete("sys", "user")

    def test_500_maps_to_transport_error(self, monkeypatch):
        monkeypatch.setattr(requests, "post",
                            lambda *a, **k: _FakeResponse(500, text="boom"))
        with pytest.raises(TransportError):
            self._client().complete("sys", "user")

    def test_connection_error_maps_to_transport_error(self, monkeypatch):
        def fake_post(*a, **k):
            raise requests.exceptions.ConnectionError("refused")

        monkeypatch.setattr(requests, "post", fake_post)
        with pytest.raises(TransportError):
            self._client().complete("sys", "user")

    def test_missing_keys_map_to_malformed(self, monkeypatch):
        monkeypatch.setattr(requests, "post",
                            lambda *a, **k: _FakeResponse(200, {"choices": []}))
        with pytest.raises(MalformedResponse):
            self._client().complete("sys", "user")

    def test_blank_completion_is_malformed(self, monkeypatch):
        payload = {"choices": [{"message": {"content": "   "}}]}
        monkeypatch.setattr(requests, "post",
                            lambda *a, **k: _FakeResponse(200, payload))
        with pytest.raises(MalformedResponse):
            self._client().complete("sys", "user")


def _transcript(tag: str) -> str:
    return f"Q: what is heard in clip {tag}?\nA: clip {tag} sounds."


class TestRunGeneration:
    def _captions(self, n):
        return [(f"c{i:03d}", f"caption {i:03d}") for i in range(n)]

    def _client_for(self, captions):
        return MockLLMClient({text: _transcript(cid) for cid, text in captions})

    def test_all_captions_complete_offline(self, tmp_path):
        captions = self._captions(6)
        client = self._client_for(captions)
        cfg = ClientConfig(backoff_s=0.0)
        log = tmp_path / "gen.jsonl"
        results = run_generation(captions, get_template("type1", "detail"),
                                 client, cfg, str(log))
        assert set(results) == {cid for cid, _ in captions}
        assert all(r.status == "ok" for r in results.values())
        assert results["c002"].transcript == _transcript("c002")

    def test_log_is_appended_and_loadable(self, tmp_path):
        captions = self._captions(3)
        log = tmp_path / "gen.jsonl"
        run_generation(captions, get_template("type1", "mcq"),
                       self._client_for(captions), ClientConfig(backoff_s=0.0),
                       str(log))
        loaded = load_generation_log(str(log))
        assert set(loaded) == {"c000", "c001", "c002"}
        recs = [json.loads(line) for line in log.read_text().splitlines()]
        assert all(r["data_type"] == "type1" and r["kind"] == "mcq" for r in recs)

    def test_rerun_skips_finished_captions(self, tmp_path):
        captions = self._captions(4)
        client = self._client_for(captions)
        cfg = ClientConfig(backoff_s=0.0)
        log = tmp_path / "gen.jsonl"
        tpl = get_template("type1", "detail")
        first = run_generation(captions, tpl, client, cfg, str(log))
        calls_after_first = client.calls
        second = run_generation(captions, tpl, client, cfg, str(log))
        assert client.calls == calls_after_first  # nothing re-queried
        assert {c: r.transcript for c, r in second.items()} == \
               {c: r.transcript for c, r in first.items()}

    def test_failed_captions_are_retried_on_rerun(self, tmp_path):
        captions = [("c0", "known caption"), ("c1", "missing caption")]
        client = MockLLMClient({"known caption": _transcript("c0")})
        cfg = ClientConfig(max_attempts=1, backoff_s=0.0)
        log = tmp_path / "gen.jsonl"
        tpl = get_template("type1", "detail")
        first = run_generation(captions, tpl, client, cfg, str(log))
        assert first["c0"].status == "ok"
        assert first["c1"].status == "failed"
        assert "MalformedResponse" in first["c1"].error
        # supply the missing transcript and re-run: only c1 is queried again
        client.transcripts["missing caption"] = _transcript("c1")
        calls_before = client.calls
        second = run_generation(captions, tpl, client, cfg, str(log))
        assert client.calls == calls_before + 1
        assert second["c1"].status == "ok"

    def test_latest_log_record_wins(self, tmp_path):
        log = tmp_path / "gen.jsonl"
        rows = [
            {"caption_id": "c0", "status": "failed", "transcript": "",
             "error": "x", "attempts": 1},
            {"caption_id": "c0", "status": "ok", "transcript": "T",
             "error": "", "attempts": 1},
        ]
        log.write_text("".join(json.dumps(r) + "\n" for r in rows))
        loaded = load_generation_log(str(log))
        assert loaded["c0"].status == "ok"
        assert loaded["c0"].transcript == "T"

    def test_concurrency_never_exceeds_limit(self, tmp_path):
        captions = self._captions(12)
        client = self._client_for(captions)
        client.latency_s = 0.02
        cfg = ClientConfig(max_concurrency=4, backoff_s=0.0)
        run_generation(captions, get_template("type1", "detail"), client, cfg,
                       str(tmp_path / "gen.jsonl"))
        assert 1 <= client.peak_in_flight <= 4

    def test_single_worker_is_strictly_serial(self, tmp_path):
        captions = self._captions(5)
        client = self._client_for(captions)
        client.latency_s = 0.01
        cfg = ClientConfig(max_concurrency=1, backoff_s=0.0)
        run_generation(captions, get_template("type1", "detail"), client, cfg,
                       str(tmp_path / "gen.jsonl"))
        assert client.peak_in_flight == 1


class TestParser:
    def test_wind_mcq_transcript_yields_five_pairs(self):
        accepted, rejected = parse_qa(WIND_MCQ, "mcq")
        assert len(accepted) == 5
        assert rejected == []
        assert accepted[0][1] == "B) Wind blowing"

    def test_wind_mcq_questions_carry_options(self):
        accepted, _ = parse_qa(WIND_MCQ, "mcq")
        for question, answer in accepted:
            options = extract_options(question)
            assert len(options) == 4
            matches = [o for o in options if answer.startswith(o.render())]
            assert len(matches) == 1

    def test_wind_detail_transcript_yields_five_pairs(self):
        accepted, rejected = parse_qa(WIND_DETAIL, "detail")
        assert len(accepted) == 5
        assert rejected == []
        assert accepted[0][0] == "What is the sound event present in the clip?"
        assert accepted[0][1].startswith(
            "The sound event present in the clip is the rustling of wind")

    def test_four_good_one_malformed(self):
        lines = WIND_DETAIL.strip().splitlines()
        # drop the final answer line so the last question dangles
        broken = "\n".join(lines[:-1])
        accepted, rejected = parse_qa(broken, "detail")
        assert len(accepted) == 4
        assert len(rejected) == 1
        assert rejected[0].reason == "missing_answer"

    def test_refusal_answers_rejected(self):
        raw = ("Q: What instrument is playing?\n"
               "A: Unknown, the caption does not say.\n"
               "Q: What do you hear?\nA: A steady hum.\n")
        accepted, rejected = parse_qa(raw, "detail")
        assert [q for q, _ in accepted] == ["What do you hear?"]
        assert rejected[0].reason == "refusal"

    def test_world_knowledge_definitional_pair_rejected(self):
        raw = ("Q: What kind of sound is sizzling?\n"
               "A: Sizzling is the high-pitched noise that results from food "
               "being cooked on a hot surface.\n")
        accepted, rejected = parse_qa(raw, "detail")
        assert accepted == []
        assert rejected[0].reason == "world_knowledge"

    def test_definitional_question_kept_when_answer_points_at_clip(self):
        raw = ("Q: What kind of sound is sizzling?\n"
               "A: In this clip the sizzling is a bright crackle from a pan.\n")
        accepted, rejected = parse_qa(raw, "detail")
        assert len(accepted) == 1
        assert rejected == []

    def test_mcq_too_few_options(self):
        raw = "Q: Which sound is present? A) rain\nA: A) rain\n"
        accepted, rejected = parse_qa(raw, "mcq")
        assert accepted == []
        assert rejected[0].reason == "too_few_options"

    def test_mcq_answer_must_match_an_option(self):
        raw = ("Q: Which sound is present? A) rain B) wind\n"
               "A: C) thunder\n")
        accepted, rejected = parse_qa(raw, "mcq")
        assert accepted == []
        assert rejected[0].reason == "answer_option_mismatch"

    def test_mcq_bare_letter_answer_is_accepted(self):
        raw = ("Q: Which sound is present? A) rain B) wind\n"
               "A: B)\n")
        accepted, rejected = parse_qa(raw, "mcq")
        assert len(accepted) == 1
        assert rejected == []

    def test_over_quota_pairs_rejected(self):
        raw = WIND_DETAIL + "Q: One more?\nA: In the clip, yes.\n"
        accepted, rejected = parse_qa(raw, "detail")
        assert len(accepted) == 5
        assert rejected[0].reason == "over_quota"

    def test_zero_structure_raises(self):
        with pytest.raises(ParseError):
            parse_qa("The model refused to reply in the agreed layout.", "detail")

    def test_unknown_kind_raises(self):
        with pytest.raises(ParseError):
            parse_qa(WIND_DETAIL, "essay")

    def test_stray_answer_lines_ignored(self):
        raw = ("A: orphan answer\n"
               "Q: What do you hear?\nA: A ticking clock in the recording.\n")
        accepted, rejected = parse_qa(raw, "detail")
        assert len(accepted) == 1
        assert rejected == []

    def test_option_letters_must_start_at_a_and_stay_consecutive(self):
        assert extract_options("pick B) x C) y") == []
        assert extract_options("pick A) x C) y") == []
        got = extract_options("pick A) x B) y C) z")
        assert [o.letter for o in got] == ["A", "B", "C"]
        assert [o.text for o in got] == ["x", "y", "z"]

    def test_parenthesized_words_are_not_options(self):
        # lowercase letters and mid-word parens must not register
        assert extract_options("we hear a) nothing or (B) something") == []


class TestConvert:
    def test_caption_record(self):
        rows = convert_existing([
            {"kind": "caption", "audio_id": "clip1", "caption": "a dog barks"}])
        row = rows[0]
        assert row.task == "caption" and row.source == "existing"
        assert row.audio2_id == ""
        assert row.question == CAPTION_QUESTIONS[0]
        assert row.answer == "a dog barks"
        row.validate()

    def test_caption_questions_rotate(self):
        records = [{"kind": "caption", "audio_id": f"c{i}", "caption": "x"}
                   for i in range(len(CAPTION_QUESTIONS) + 1)]
        rows = convert_existing(records)
        questions = [r.question for r in rows]
        assert questions[: len(CAPTION_QUESTIONS)] == list(CAPTION_QUESTIONS)
        assert questions[len(CAPTION_QUESTIONS)] == CAPTION_QUESTIONS[0]

    def test_entailment_contradiction_maps_to_its_option(self):
        rows = convert_existing([{
            "kind": "entailment", "audio_id": "clip2",
            "hypothesis": "A choir is singing.", "label": "contradiction"}])
        row = rows[0]
        assert row.task == "entailment_mcq"
        assert "A choir is singing." in row.question
        assert "A) entailment" in row.question
        assert row.answer == "C) contradiction"
        row.validate()

    def test_entailment_bad_label(self):
        with pytest.raises(SchemaError):
            convert_existing([{"kind": "entailment", "audio_id": "c",
                               "hypothesis": "h", "label": "maybe"}])

    def test_difference_tier3(self):
        rows = convert_existing([{
            "kind": "difference", "audio1_id": "a", "audio2_id": "b",
            "tier": 3, "explanation": "The first clip is music, the second rain."}])
        row = rows[0]
        assert row.task == "difference_t3"
        assert row.audio1_id == "a" and row.audio2_id == "b"
        row.validate()

    def test_difference_bad_tier(self):
        with pytest.raises(SchemaError):
            convert_existing([{"kind": "difference", "audio1_id": "a",
                               "audio2_id": "b", "tier": 4, "explanation": "x"}])

    def test_binary_normalizes_answer(self):
        rows = convert_existing([{
            "kind": "binary", "audio_id": "a",
            "question": "Is speech present?", "answer": "Yes."}])
        assert rows[0].answer == "yes"
        rows[0].validate()

    def test_binary_rejects_non_yes_no(self):
        with pytest.raises(SchemaError):
            convert_existing([{"kind": "binary", "audio_id": "a",
                               "question": "Is speech present?",
                               "answer": "perhaps"}])

    def test_unknown_kind(self):
        with pytest.raises(SchemaError):
            convert_existing([{"kind": "transcription", "audio_id": "a"}])

    def test_missing_fields(self):
        with pytest.raises(SchemaError):
            convert_existing([{"kind": "caption", "audio_id": "a"}])


def _quads(n_clips: int, per_clip: int) -> list[QAQuadruple]:
    rows = []
    for c in range(n_clips):
        for q in range(per_clip):
            rows.append(QAQuadruple(
                audio1_id=f"clip{c:03d}", audio2_id="",
                question=f"Question {q} about clip {c}?",
                answer=f"Answer {q} for clip {c}.",
                task="synth_detail", source="type1"))
    return rows


class TestCompose:
    def test_percentages_are_exact_on_round_counts(self):
        report = composition_report({"a": 10, "b": 20, "c": 70})
        assert report.total == 100
        assert report.subset_percent == {"a": 10.0, "b": 20.0, "c": 70.0}

    def test_group_rollup_and_targets(self):
        counts = {"s1": 30, "s2": 40, "e1": 25, "e2": 5}
        groups = {"s1": "synthetic", "s2": "synthetic",
                  "e1": "existing", "e2": "existing"}
        report = composition_report(counts, groups,
                                    targets={"synthetic": 70.0, "existing": 30.0})
        assert report.group_counts == {"synthetic": 70, "existing": 30}
        assert report.group_percent["synthetic"] == pytest.approx(70.0)
        assert report.deviation["synthetic"] == pytest.approx(0.0)
        assert report.deviation["existing"] == pytest.approx(0.0)
        assert any("synthetic" in line for line in report.lines())

    def test_empty_and_negative_counts_rejected(self):
        from aqalab.errors import DataError
        with pytest.raises(DataError):
            composition_report({})
        with pytest.raises(DataError):
            composition_report({"a": -1})
        with pytest.raises(DataError):
            composition_report({"a": 0})

    def test_splits_are_disjoint_by_clip(self):
        rows = _quads(n_clips=40, per_clip=3)
        manifests = compose_splits(rows, {"train": 0.8, "val": 0.1, "test": 0.1},
                                   seed=7)
        ids = {s: {r.audio1_id for r in m.rows} for s, m in manifests.items()}
        assert ids["train"] & ids["val"] == set()
        assert ids["train"] & ids["test"] == set()
        assert ids["val"] & ids["test"] == set()
        total = sum(len(m.rows) for m in manifests.values())
        assert total == len(rows)

    def test_split_sizes_track_fractions(self):
        rows = _quads(n_clips=100, per_clip=2)
        manifests = compose_splits(rows, {"train": 0.8, "val": 0.1, "test": 0.1},
                                   seed=0)
        n = len(rows)
        assert abs(len(manifests["train"].rows) / n - 0.8) < 0.05
        assert abs(len(manifests["val"].rows) / n - 0.1) < 0.05

    def test_same_seed_reproduces_identical_splits(self):
        rows = _quads(n_clips=30, per_clip=2)
        a = compose_splits(rows, seed=3)
        b = compose_splits(rows, seed=3)
        for split in a:
            assert [r.audio1_id for r in a[split].rows] == \
                   [r.audio1_id for r in b[split].rows]

    def test_different_seeds_differ(self):
        rows = _quads(n_clips=30, per_clip=2)
        a = compose_splits(rows, seed=0)
        b = compose_splits(rows, seed=1)
        assert any(
            [r.audio1_id for r in a[s].rows] != [r.audio1_id for r in b[s].rows]
            for s in a)

    def test_fraction_validation(self):
        rows = _quads(4, 1)
        with pytest.raises(ConfigError):
            compose_splits(rows, {"train": 0.5, "val": 0.1})
        with pytest.raises(ConfigError):
            compose_splits(rows, {"train": 0.9, "holdout": 0.1})
        from aqalab.errors import DataError
        with pytest.raises(DataError):
            compose_splits([], {"train": 1.0})

    def test_manifest_composition_sums_to_hundred(self):
        rows = _quads(20, 2)
        for row in rows[::2]:
            row.source = "existing"
            row.task = "caption"
        manifests = compose_splits(rows, seed=0)
        for m in manifests.values():
            if m.rows:
                assert sum(m.composition.values()) == pytest.approx(100.0)


class TestStats:
    def test_words_tokenization(self):
        assert words("A b.") == ["a", "b"]
        assert words("Hello, World! it's fine") == ["hello", "world", "it's", "fine"]
        assert words("  ") == []

    def test_hand_counted_example(self):
        rows = [
            QAQuadruple("c1", "", "A b.", "ok then", "caption", "existing"),
            QAQuadruple("c2", "", "a c d", "ok again", "caption", "existing"),
        ]
        stats = compute_stats(rows, key_fn=lambda r: "all")
        subset = stats.subsets["all"]
        assert subset.n_pairs == 2
        assert subset.mean_question_words == pytest.approx(2.5)
        assert subset.question_vocab == 4  # {a, b, c, d}
        assert subset.mean_answer_words == pytest.approx(2.0)
        assert subset.answer_vocab == 3  # {ok, then, again}

    def test_counting_oracle_on_generated_rows(self):
        rows = []
        for i in range(100):
            rows.append(QAQuadruple(
                f"c{i}", "", f"what sound number {i % 7} is present?",
                f"the sound {i % 5} is a hum in the background noise",
                "synth_detail", "type1"))
        stats = compute_stats(rows, key_fn=lambda r: "all")
        q_tokens = [words(r.question) for r in rows]
        a_tokens = [words(r.answer) for r in rows]
        subset = stats.subsets["all"]
        assert subset.mean_question_words == pytest.approx(
            sum(len(t) for t in q_tokens) / 100)
        assert subset.question_vocab == len({w for t in q_tokens for w in t})
        assert subset.answer_vocab == len({w for t in a_tokens for w in t})
        # lexicon mentions: "sound" in every Q and every A, "hum"/"noise"/
        # "background" once per answer
        assert stats.audio_word_counts["sound"] == 200
        assert stats.audio_word_counts["hum"] == 100
        assert stats.audio_word_counts["background"] == 100

    def test_subsets_keyed_by_source_and_task(self):
        rows = _quads(3, 2)
        rows[0].source = "existing"
        rows[0].task = "caption"
        stats = compute_stats(rows)
        assert "existing/caption" in stats.subsets
        assert "type1/synth_detail" in stats.subsets
        assert stats.total_pairs == 6

    def test_top_k_caps_audio_word_table(self):
        rows = [QAQuadruple("c", "", "sound noise hum buzz", "loud quiet soft",
                            "caption", "existing")]
        stats = compute_stats(rows, top_k=2)
        assert len(stats.audio_word_counts) == 2


class TestEndToEndForge:
    """Mock generation through parsing into validated quadruples."""

    def test_mcq_pipeline_produces_manifest_rows(self, tmp_path):
        caption = "The wind is blowing and rustling occurs"
        client = MockLLMClient({caption: WIND_MCQ})
        cfg = ClientConfig(backoff_s=0.0)
        results = run_generation([("wind01", caption)],
                                 get_template("type1", "mcq"), client, cfg,
                                 str(tmp_path / "log.jsonl"))
        accepted, rejected = parse_qa(results["wind01"].transcript, "mcq")
        assert len(accepted) == 5 and not rejected
        rows = [QAQuadruple("wind01", "", q, a, "synth_mcq", "type1")
                for q, a in accepted]
        for row in rows:
            row.validate()
        manifests = compose_splits(rows, {"train": 1.0}, seed=0)
        assert len(manifests["train"].rows) == 5
