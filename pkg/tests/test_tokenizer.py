"""Tokenizer tests: round-trips, merge behavior, serialization."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqalab.errors import VocabError
from aqalab.tokenizer import (
    BOS_ID,
    EOS_ID,
    FIRST_MERGE_ID,
    PAD_ID,
    SEP_ID,
    Tokenizer,
    train_tokenizer,
)

CORPUS = [
    "What is the sound event present in the clip?",
    "The sound of wind blowing through the trees.",
    "A dog barks twice and then a car passes by.",
    "What should I do when I hear this sound?",
]


class TestSpecials:
    def test_ids_fixed_and_distinct(self):
        assert (PAD_ID, BOS_ID, EOS_ID, SEP_ID) == (0, 1, 2, 3)
        assert len({PAD_ID, BOS_ID, EOS_ID, SEP_ID}) == 4

    def test_bos_eos_wrapping(self):
        tok = Tokenizer()
        ids = tok.encode("hi", add_bos=True, add_eos=True)
        assert ids[0] == BOS_ID and ids[-1] == EOS_ID
        assert tok.decode(ids) == "hi"

    def test_specials_skipped_in_decode(self):
        tok = Tokenizer()
        assert tok.decode([PAD_ID, SEP_ID] + tok.encode("x") + [EOS_ID]) == "x"


class TestRoundTrip:
    @pytest.mark.parametrize("text", [
        "", "a", "hello world", "Q: what is this?\nA: a dog barking.",
        "naïve café — ünïcödé", "emoji 🔊🐦 test", "tabs\tand\nnewlines",
    ])
    def test_untrained_round_trip(self, text):
        tok = Tokenizer()
        assert tok.decode(tok.encode(text)) == text

    @pytest.mark.parametrize("text", CORPUS + ["unseen words zebra quartz"])
    def test_trained_round_trip(self, text):
        tok = train_tokenizer(CORPUS, n_merges=100)
        assert tok.decode(tok.encode(text)) == text

    @given(text=st.text(max_size=200))
    @settings(max_examples=80, deadline=None)
    def test_round_trip_property(self, text):
        tok = train_tokenizer(CORPUS, n_merges=50)
        assert tok.decode(tok.encode(text)) == text


class TestMerges:
    def test_merges_compress(self):
        tok0 = Tokenizer()
        tok = train_tokenizer(CORPUS, n_merges=100)
        text = CORPUS[0]
        assert len(tok.encode(text)) < len(tok0.encode(text))

    def test_merge_ids_start_after_bytes(self):
        tok = train_tokenizer(CORPUS, n_merges=10)
        assert tok.merges[0][2] == FIRST_MERGE_ID
        assert tok.vocab_size == FIRST_MERGE_ID + len(tok.merges)

    def test_training_deterministic(self):
        a = train_tokenizer(CORPUS, n_merges=64)
        b = train_tokenizer(CORPUS, n_merges=64)
        assert a.merges == b.merges

    def test_stops_when_no_repeats(self):
        tok = train_tokenizer(["ab"], n_merges=50)
        assert len(tok.merges) == 0


class TestSerialization:
    def test_json_round_trip(self, tmp_path):
        tok = train_tokenizer(CORPUS, n_merges=80)
        path = str(tmp_path / "tok.json")
        tok.save(path)
        back = Tokenizer.load(path)
        assert back.merges == tok.merges
        for text in CORPUS:
            assert back.encode(text) == tok.encode(text)

    def test_incompatible_special_map_rejected(self):
        tok = train_tokenizer(CORPUS, n_merges=4)
        d = tok.to_dict()
        d["special_ids"]["sep"] = 99
        with pytest.raises(VocabError):
            Tokenizer.from_dict(d)

    def test_unknown_id_rejected(self):
        tok = Tokenizer()
        with pytest.raises(VocabError):
            tok.decode([tok.vocab_size + 5])
