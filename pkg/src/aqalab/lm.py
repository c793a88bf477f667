"""Small decoder-only language model conditioned on embedding prefixes.

Attention is written out by hand (matmul, additive mask, softmax) rather
than going through a fused kernel. That keeps causality bitwise-checkable:
masked positions contribute exp(-inf) = 0 exactly, so perturbing a token
can never touch the logits before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ConfigError, LengthError, VocabError
from .tokenizer import SEP_ID


@dataclass
class LMConfig:
    n_layers: int = 4
    d_model: int = 64
    n_heads: int = 4
    vocab_size: int = 512
    max_seq_len: int = 512
    mode: str = "full"  # {frozen, lora, full}; consumed by the trainer

    def validate(self) -> None:
        if self.d_model % self.n_heads != 0:
            raise ConfigError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        for name in ("n_layers", "d_model", "n_heads", "vocab_size", "max_seq_len"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.mode not in ("frozen", "lora", "full"):
            raise ConfigError(f"unknown mode {self.mode!r}")


class CausalSelfAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.out_proj = nn.Linear(d_model, d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        n, d = x.shape
        h, hd = self.n_heads, self.head_dim
        q = self.q_proj(x).view(n, h, hd).transpose(0, 1)  # (h, n, hd)
        k = self.k_proj(x).view(n, h, hd).transpose(0, 1)
        v = self.v_proj(x).view(n, h, hd).transpose(0, 1)
        att = (q @ k.transpose(-2, -1)) / math.sqrt(hd)     # (h, n, n)
        mask = torch.triu(torch.ones(n, n, dtype=torch.bool), diagonal=1)
        att = att.masked_fill(mask, float("-inf"))
        att = F.softmax(att, dim=-1)
        y = (att @ v).transpose(0, 1).reshape(n, d)
        return self.out_proj(y)


class Block(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(d_model)
        self.attn = CausalSelfAttention(d_model, n_heads)
        self.ln2 = nn.LayerNorm(d_model)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, 4 * d_model),
            nn.GELU(),
            nn.Linear(4 * d_model, d_model),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x + self.attn(self.ln1(x))
        return x + self.mlp(self.ln2(x))


class DecoderLM(nn.Module):
    def __init__(self, config: LMConfig):
        super().__init__()
        config.validate()
        self.config = config
        self.tok_emb = nn.Embedding(config.vocab_size, config.d_model)
        self.pos_emb = nn.Embedding(config.max_seq_len, config.d_model)
        self.blocks = nn.ModuleList(
            Block(config.d_model, config.n_heads) for _ in range(config.n_layers))
        self.ln_f = nn.LayerNorm(config.d_model)
        self.head = nn.Linear(config.d_model, config.vocab_size, bias=False)

    def _check_ids(self, ids: torch.Tensor) -> None:
        if ids.numel() and (ids.min() < 0 or ids.max() >= self.config.vocab_size):
            raise VocabError(
                f"token id outside [0, {self.config.vocab_size}): "
                f"min={int(ids.min())} max={int(ids.max())}")

    def embed_text(self, token_ids) -> torch.Tensor:
        """Pure embedding-table lookup, (len, d_model). Positions are added
        in forward() over the whole assembled sequence, not here."""
        ids = torch.as_tensor(token_ids, dtype=torch.long)
        if ids.numel() == 0:
            p = self.tok_emb.weight
            return torch.zeros(0, self.config.d_model, dtype=p.dtype)
        self._check_ids(ids)
        return self.tok_emb(ids)

    def run_embeddings(self, seq: torch.Tensor) -> torch.Tensor:
        """(n, d_model) embeddings -> (n, vocab_size) logits."""
        n = seq.shape[0]
        if n > self.config.max_seq_len:
            raise LengthError(f"sequence length {n} exceeds max_seq_len "
                              f"{self.config.max_seq_len}")
        if seq.shape[1] != self.config.d_model:
            raise LengthError(f"embedding width {seq.shape[1]} != d_model "
                              f"{self.config.d_model}")
        pos = self.pos_emb(torch.arange(n))
        x = seq + pos.to(seq.dtype)
        for block in self.blocks:
            x = block(x)
        return self.head(self.ln_f(x))

    def forward(self, prefix_tokens: torch.Tensor, target_ids) -> torch.Tensor:
        """Prefix embeddings (K, d_model) + target token ids -> logits
        for all K + len(target) positions."""
        if prefix_tokens.ndim != 2 or prefix_tokens.shape[1] != self.config.d_model:
            raise LengthError(f"prefix width {tuple(prefix_tokens.shape)} does not "
                              f"match d_model {self.config.d_model}")
        target = self.embed_text(target_ids).to(prefix_tokens.dtype)
        return self.run_embeddings(torch.cat([prefix_tokens, target], dim=0))

    def sep_embedding(self) -> torch.Tensor:
        return self.tok_emb.weight[SEP_ID]
