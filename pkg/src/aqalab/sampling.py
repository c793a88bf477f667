"""Autoregressive decoding: nucleus (top-p) sampling and greedy argmax.

The nucleus at probability p is the smallest set of highest-probability
tokens whose mass reaches p, with ties between equal probabilities broken
toward the lower token id. That tie rule is arbitrary but pinned, because
it changes which sequences a seeded run produces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .errors import ConfigError, LengthError
from .lm import DecoderLM
from .prefix import PrefixEmbedding
from .tokenizer import EOS_ID, Tokenizer


@dataclass
class SamplerConfig:
    top_p: float = 0.8
    temperature: float = 1.0
    max_new_tokens: int = 64
    seed: int = 0
    greedy: bool = False

    def validate(self) -> None:
        if not 0.0 < self.top_p <= 1.0:
            raise ConfigError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.temperature <= 0.0:
            raise ConfigError("temperature must be positive")
        if self.max_new_tokens < 1:
            raise ConfigError("max_new_tokens must be >= 1")


@dataclass
class GenerationResult:
    token_ids: list[int]
    text: str
    stop_reason: str  # {eos, max_new_tokens, max_seq_len}


def nucleus_filter(probs: np.ndarray, p: float) -> np.ndarray:
    """Zero out everything outside the nucleus and renormalize.

    p >= 1 returns the distribution unchanged (identity, no float traps
    from the cumulative sum landing at 0.9999...).
    """
    probs = np.asarray(probs, dtype=np.float64)
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ConfigError(f"probabilities sum to {total}, not 1")
    if p >= 1.0:
        return probs.copy()
    # primary key: descending probability; secondary: ascending token id
    order = np.lexsort((np.arange(len(probs)), -probs))
    csum = np.cumsum(probs[order])
    cut = int(np.searchsorted(csum, p, side="left")) + 1
    out = np.zeros_like(probs)
    keep = order[:cut]
    out[keep] = probs[keep]
    return out / out.sum()


def _softmax64(logits: torch.Tensor) -> np.ndarray:
    row = logits.detach().to(torch.float64).numpy()
    row = row - row.max()
    e = np.exp(row)
    return e / e.sum()


def generate(prefix: PrefixEmbedding, lm: DecoderLM, tokenizer: Tokenizer,
             config: SamplerConfig | None = None) -> GenerationResult:
    """Decode until eos, the token budget, or the context limit."""
    config = config or SamplerConfig()
    config.validate()
    if prefix.k >= lm.config.max_seq_len:
        raise LengthError(f"prefix length {prefix.k} leaves no room to generate "
                          f"(max_seq_len {lm.config.max_seq_len})")
    rng = np.random.default_rng(config.seed)
    ids: list[int] = []
    stop_reason = "max_new_tokens"
    with torch.no_grad():
        for _ in range(config.max_new_tokens):
            logits = lm(prefix.tokens, ids)
            probs = _softmax64(logits[-1] / config.temperature)
            if config.greedy:
                next_id = int(np.argmax(probs))  # argmax tie -> lowest id
            else:
                filtered = nucleus_filter(probs, config.top_p)
                next_id = int(rng.choice(len(filtered), p=filtered))
            ids.append(next_id)
            if next_id == EOS_ID:
                stop_reason = "eos"
                break
            if prefix.k + len(ids) >= lm.config.max_seq_len:
                stop_reason = "max_seq_len"
                break
    return GenerationResult(token_ids=ids, text=tokenizer.decode(ids),
                            stop_reason=stop_reason)
