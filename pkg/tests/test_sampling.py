"""Sampler tests: nucleus arithmetic, support oracle, decoding behavior."""

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from aqalab.errors import ConfigError, LengthError
from aqalab.lm import DecoderLM, LMConfig
from aqalab.prefix import PrefixEmbedding
from aqalab.sampling import GenerationResult, SamplerConfig, generate, nucleus_filter
from aqalab.tokenizer import EOS_ID, Tokenizer


class TestNucleusFilter:
    def test_worked_example(self):
        out = nucleus_filter(np.array([0.5, 0.3, 0.2]), 0.8)
        np.testing.assert_allclose(out, [0.625, 0.375, 0.0], atol=1e-12)

    def test_p_one_is_identity(self):
        probs = np.array([0.4, 0.1, 0.25, 0.25])
        np.testing.assert_array_equal(nucleus_filter(probs, 1.0), probs)

    def test_tiny_p_is_top_one(self):
        out = nucleus_filter(np.array([0.2, 0.5, 0.3]), 1e-9)
        np.testing.assert_allclose(out, [0.0, 1.0, 0.0])

    def test_ties_broken_by_lower_id(self):
        out = nucleus_filter(np.array([0.25, 0.25, 0.25, 0.25]), 0.5)
        np.testing.assert_allclose(out, [0.5, 0.5, 0.0, 0.0])

    def test_unnormalized_input_rejected(self):
        with pytest.raises(ConfigError):
            nucleus_filter(np.array([0.5, 0.6]), 0.8)

    @staticmethod
    def _oracle_support(probs, p):
        """Brute force: try every prefix size of the sorted order."""
        order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
        for size in range(1, len(probs) + 1):
            if sum(probs[i] for i in order[:size]) >= p:
                return set(order[:size])
        return set(order)

    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 64),
           p=st.floats(0.01, 0.999))
    @settings(max_examples=120, deadline=None)
    def test_support_matches_exhaustive_oracle(self, seed, n, p):
        rng = np.random.default_rng(seed)
        probs = rng.random(n) + 1e-9
        probs /= probs.sum()
        out = nucleus_filter(probs, p)
        got_support = set(np.nonzero(out)[0].tolist())
        assert got_support == self._oracle_support(probs.tolist(), p)

    @given(seed=st.integers(0, 2**32 - 1), p=st.floats(0.05, 0.95))
    @settings(max_examples=60, deadline=None)
    def test_minimality_and_renormalization(self, seed, p):
        rng = np.random.default_rng(seed)
        probs = rng.random(16)
        probs /= probs.sum()
        out = nucleus_filter(probs, p)
        support = np.nonzero(out)[0]
        mass = probs[support].sum()
        assert mass >= p - 1e-12
        if len(support) > 1:
            weakest = support[np.argmin(probs[support])]
            assert mass - probs[weakest] < p  # dropping one breaks the bound
        assert abs(out.sum() - 1.0) < 1e-12


def _lm(seed=0, vocab=16, max_len=32):
    torch.manual_seed(seed)
    return DecoderLM(LMConfig(n_layers=1, d_model=8, n_heads=1,
                              vocab_size=vocab, max_seq_len=max_len))


def _prefix(k=4, d=8, seed=0):
    g = torch.Generator().manual_seed(seed)
    return PrefixEmbedding(tokens=torch.randn(k, d, generator=g),
                           segment_map=["audio1"] * (k - 1) + ["sep"])


class TestGenerate:
    def test_defaults(self):
        cfg = SamplerConfig()
        assert cfg.top_p == 0.8 and cfg.temperature == 1.0

    def test_same_seed_same_output(self):
        lm, tok = _lm(), Tokenizer()
        a = generate(_prefix(), lm, tok, SamplerConfig(seed=5, max_new_tokens=10))
        b = generate(_prefix(), lm, tok, SamplerConfig(seed=5, max_new_tokens=10))
        assert a.token_ids == b.token_ids and a.text == b.text

    def test_greedy_matches_manual_argmax_loop(self):
        lm, tok = _lm(seed=2), Tokenizer()
        p = _prefix(seed=3)
        got = generate(p, lm, tok, SamplerConfig(greedy=True, max_new_tokens=6))
        ids = []
        with torch.no_grad():
            for _ in range(6):
                logits = lm(p.tokens, ids)
                ids.append(int(torch.argmax(logits[-1])))
                if ids[-1] == EOS_ID:
                    break
        assert got.token_ids == ids

    def test_tiny_p_equals_greedy(self):
        lm, tok = _lm(seed=4), Tokenizer()
        p = _prefix(seed=4)
        greedy = generate(p, lm, tok, SamplerConfig(greedy=True, max_new_tokens=8))
        nucleus = generate(p, lm, tok, SamplerConfig(top_p=1e-9, seed=0,
                                                     max_new_tokens=8))
        assert greedy.token_ids == nucleus.token_ids

    def test_greedy_is_seed_independent(self):
        lm, tok = _lm(seed=6), Tokenizer()
        p = _prefix(seed=6)
        a = generate(p, lm, tok, SamplerConfig(greedy=True, seed=1, max_new_tokens=5))
        b = generate(p, lm, tok, SamplerConfig(greedy=True, seed=999, max_new_tokens=5))
        assert a.token_ids == b.token_ids

    def test_eos_stops_generation(self):
        class ConstLogits(torch.nn.Module):
            """Always puts all its mass on one favored token."""

            def __init__(self, base, favored):
                super().__init__()
                self.config = base.config
                self.favored = favored

            def forward(self, prefix_tokens, ids):
                n = prefix_tokens.shape[0] + len(ids)
                out = torch.zeros(n, self.config.vocab_size)
                out[:, self.favored] = 10.0
                return out

        lm, tok = ConstLogits(_lm(seed=0), EOS_ID), Tokenizer()
        out = generate(_prefix(), lm, tok, SamplerConfig(greedy=True,
                                                         max_new_tokens=20))
        assert out.token_ids == [EOS_ID]
        assert out.stop_reason == "eos"
        assert out.text == ""

    def test_prefix_at_limit_raises(self):
        lm, tok = _lm(max_len=8), Tokenizer()
        with pytest.raises(LengthError):
            generate(_prefix(k=8), lm, tok, SamplerConfig())

    def test_stops_at_context_limit(self):
        lm, tok = _lm(seed=1, max_len=10), Tokenizer()
        with torch.no_grad():
            lm.head.weight[EOS_ID].fill_(-100.0)  # never emit eos
        out = generate(_prefix(k=6), lm, tok,
                       SamplerConfig(greedy=True, max_new_tokens=50))
        assert len(out.token_ids) == 4
        assert out.stop_reason == "max_seq_len"

    def test_sampled_tokens_lie_in_nucleus(self):
        lm, tok = _lm(seed=7), Tokenizer()
        p = _prefix(seed=7)
        cfg = SamplerConfig(top_p=0.5, seed=11, max_new_tokens=8)
        out = generate(p, lm, tok, cfg)
        ids = []
        with torch.no_grad():
            for tok_id in out.token_ids:
                logits = lm(p.tokens, ids)
                row = logits[-1].to(torch.float64).numpy()
                probs = np.exp(row - row.max())
                probs /= probs.sum()
                support = set(np.nonzero(nucleus_filter(probs, 0.5))[0].tolist())
                assert tok_id in support
                ids.append(tok_id)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SamplerConfig(top_p=0.0).validate()
        with pytest.raises(ConfigError):
            SamplerConfig(top_p=1.5).validate()
        with pytest.raises(ConfigError):
            SamplerConfig(temperature=0.0).validate()
        with pytest.raises(ConfigError):
            SamplerConfig(max_new_tokens=0).validate()
