"""Assemble the language-model prefix from audio embeddings and prompt text.

Layout with two clips:   [audio1 tokens] [sep] [audio2 tokens] [sep] [text]
Layout with one clip:    [audio1 tokens] [sep] [text]

The separator row is the LM's learned embedding for the sep token. Rows are
tagged so downstream code (and the audio-difference tasks) can tell the two
clips apart; the order is never permutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .errors import DimError
from .lm import DecoderLM
from .mapper import AudioEmbedding

SEGMENT_TAGS = ("audio1", "sep", "audio2", "text")


@dataclass
class PrefixEmbedding:
    tokens: torch.Tensor       # (k, d_model)
    segment_map: list[str]     # one tag per row

    @property
    def k(self) -> int:
        return self.tokens.shape[0]

    def rows_tagged(self, tag: str) -> torch.Tensor:
        idx = [i for i, t in enumerate(self.segment_map) if t == tag]
        return self.tokens[idx]


def build_prefix(a1: AudioEmbedding, a2: AudioEmbedding | None,
                 prompt_ids: list[int], lm: DecoderLM) -> PrefixEmbedding:
    """Concatenate mapped audio, separators, and embedded prompt text.

    k = K1 + 1 + K2 + 1 + len(prompt) with two clips; the second segment and
    its separator vanish when a2 is None, giving k = K1 + 1 + len(prompt).
    """
    d_model = lm.config.d_model
    for name, emb in (("audio1", a1), ("audio2", a2)):
        if emb is not None and emb.tokens.shape[1] != d_model:
            raise DimError(f"{name} width {emb.tokens.shape[1]} != LM d_model {d_model}")

    sep = lm.sep_embedding().unsqueeze(0).to(a1.tokens.dtype)
    text = lm.embed_text(prompt_ids).to(a1.tokens.dtype)

    parts = [a1.tokens, sep]
    tags = ["audio1"] * a1.tokens.shape[0] + ["sep"]
    if a2 is not None:
        parts += [a2.tokens, sep]
        tags += ["audio2"] * a2.tokens.shape[0] + ["sep"]
    parts.append(text)
    tags += ["text"] * text.shape[0]
    return PrefixEmbedding(tokens=torch.cat(parts, dim=0), segment_map=tags)
