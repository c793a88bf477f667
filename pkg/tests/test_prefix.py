"""Prefix assembly tests: length arithmetic, segment tagging, row fidelity."""

import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from aqalab.errors import DimError
from aqalab.lm import DecoderLM, LMConfig
from aqalab.mapper import AudioEmbedding
from aqalab.prefix import build_prefix
from aqalab.tokenizer import SEP_ID


def _lm(d_model=8, seed=0):
    torch.manual_seed(seed)
    return DecoderLM(LMConfig(n_layers=1, d_model=d_model, n_heads=1,
                              vocab_size=32, max_seq_len=512))


def _audio(k, d=8, seed=1):
    g = torch.Generator().manual_seed(seed)
    return AudioEmbedding(tokens=torch.randn(k, d, generator=g))


class TestLengths:
    def test_two_audio_arithmetic(self):
        lm = _lm()
        p = build_prefix(_audio(4), _audio(4, seed=2), [5, 6, 7, 8, 9, 10], lm)
        assert p.k == 4 + 1 + 4 + 1 + 6 == 16

    def test_one_audio_arithmetic(self):
        lm = _lm()
        p = build_prefix(_audio(4), None, [5, 6, 7, 8, 9, 10], lm)
        assert p.k == 4 + 1 + 6 == 11

    def test_empty_prompt(self):
        lm = _lm()
        p = build_prefix(_audio(3), _audio(2, seed=5), [], lm)
        assert p.k == 3 + 1 + 2 + 1

    @given(k1=st.integers(1, 40), k2=st.integers(0, 40), n_text=st.integers(0, 60))
    @settings(max_examples=50, deadline=None)
    def test_length_formula_property(self, k1, k2, n_text):
        lm = _lm()
        prompt = [(i % 28) + 4 for i in range(n_text)]
        a2 = _audio(k2, seed=3) if k2 > 0 else None
        p = build_prefix(_audio(k1), a2, prompt, lm)
        expected = k1 + 1 + (k2 + 1 if a2 is not None else 0) + n_text
        assert p.k == expected
        assert len(p.segment_map) == p.k


class TestSegments:
    def test_two_audio_tag_order(self):
        p = build_prefix(_audio(2), _audio(3, seed=4), [5, 6], _lm())
        assert p.segment_map == (["audio1"] * 2 + ["sep"] + ["audio2"] * 3
                                 + ["sep"] + ["text"] * 2)

    def test_one_audio_has_no_audio2_tags(self):
        p = build_prefix(_audio(2), None, [5], _lm())
        assert "audio2" not in p.segment_map
        assert p.segment_map.count("sep") == 1

    def test_clips_are_position_distinguishable(self):
        lm = _lm()
        a, b = _audio(3, seed=6), _audio(3, seed=7)
        ab = build_prefix(a, b, [4], lm)
        ba = build_prefix(b, a, [4], lm)
        assert not torch.equal(ab.rows_tagged("audio1"), ba.rows_tagged("audio1"))


class TestRowFidelity:
    def test_audio_rows_copied_elementwise(self):
        lm = _lm()
        a1, a2 = _audio(4, seed=8), _audio(5, seed=9)
        p = build_prefix(a1, a2, [6, 7], lm)
        assert torch.equal(p.tokens[:4], a1.tokens)
        assert torch.equal(p.tokens[5:10], a2.tokens)

    def test_separator_rows_are_sep_embedding(self):
        lm = _lm()
        p = build_prefix(_audio(4), _audio(5, seed=9), [6, 7], lm)
        sep_row = lm.tok_emb.weight[SEP_ID]
        assert torch.equal(p.tokens[4], sep_row)
        assert torch.equal(p.tokens[10], sep_row)

    def test_text_rows_are_token_embeddings(self):
        lm = _lm()
        p = build_prefix(_audio(2), None, [6, 7, 8], lm)
        assert torch.equal(p.rows_tagged("text"), lm.embed_text([6, 7, 8]))


class TestErrors:
    def test_d_model_mismatch_audio1(self):
        with pytest.raises(DimError):
            build_prefix(_audio(4, d=16), None, [5], _lm(d_model=8))

    def test_d_model_mismatch_audio2(self):
        with pytest.raises(DimError):
            build_prefix(_audio(4, d=8), _audio(4, d=12), [5], _lm(d_model=8))
