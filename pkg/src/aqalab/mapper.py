"""Mapper from encoder outputs to language-model prefix embeddings.

Pipeline for the linear and nonlinear projection kinds:

    framewise (T', C) --lift C->L--> rows 1..T'   \
    latent (L,)       --unchanged--> row 0 (CLS)   } (T'+1, L)
    project to d_model, then 8x average-pool along time keeping row 0

The transformer_const kind instead attends a fixed set of learnable
constant vectors over the lifted sequence and returns those constants'
outputs, so its token count is the constant count and the downsampler
never runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn as nn

from .errors import ConfigError, ShapeError

PROJECTION_KINDS = ("linear", "nonlinear", "transformer_const")


@dataclass
class MapperConfig:
    projection_kind: str = "nonlinear"
    d_model: int = 64
    downsample_factor: int = 8
    n_learnable_const: int = 8   # transformer_const only
    n_attn_blocks: int = 2       # transformer_const only

    def validate(self) -> None:
        if self.projection_kind not in PROJECTION_KINDS:
            raise ConfigError(f"unknown projection kind {self.projection_kind!r}")
        if self.d_model < 1:
            raise ConfigError("d_model must be >= 1")
        if self.downsample_factor < 1:
            raise ConfigError("downsample_factor must be >= 1")
        if self.projection_kind == "transformer_const" and self.n_learnable_const < 1:
            raise ConfigError("n_learnable_const must be >= 1")


@dataclass
class AudioEmbedding:
    """Prefix-ready audio tokens; the summary (CLS) row sits at cls_index."""

    tokens: torch.Tensor  # (K, d_model)
    cls_index: int = 0


def expected_token_count(t_prime: int, config: MapperConfig) -> int:
    """K for a given encoder frame count under a mapper config."""
    if config.projection_kind == "transformer_const":
        return config.n_learnable_const
    return math.ceil(t_prime / config.downsample_factor) + 1


def downsample_rows(x: torch.Tensor, factor: int) -> torch.Tensor:
    """Average consecutive groups of `factor` temporal rows; row 0 passes through.

    The trailing partial group is averaged over its true size. Output has
    ceil((rows-1)/factor) + 1 rows. factor=1 is the identity.
    """
    if x.ndim != 2 or x.shape[0] < 2:
        raise ShapeError(f"need (rows>=2, d), got {tuple(x.shape)}")
    if factor == 1:
        return x
    temporal = x[1:]
    t = temporal.shape[0]
    n_full = t // factor
    parts = [x[:1]]
    if n_full:
        parts.append(temporal[: n_full * factor].reshape(n_full, factor, -1).mean(dim=1))
    if t - n_full * factor:
        parts.append(temporal[n_full * factor :].mean(dim=0, keepdim=True))
    return torch.cat(parts, dim=0)


class Mapper(nn.Module):
    def __init__(self, config: MapperConfig, latent_dim: int, n_classes: int):
        super().__init__()
        config.validate()
        if latent_dim < 1 or n_classes < 1:
            raise ConfigError("latent_dim and n_classes must be positive")
        self.config = config
        self.latent_dim = latent_dim
        self.n_classes = n_classes
        self.lift = nn.Linear(n_classes, latent_dim)

        kind = config.projection_kind
        if kind == "linear":
            self.proj = nn.Linear(latent_dim, config.d_model)
        elif kind == "nonlinear":
            self.proj_a = nn.Linear(latent_dim, config.d_model)
            self.proj_b = nn.Linear(latent_dim, config.d_model)
            self.norm = nn.LayerNorm(config.d_model)
        else:
            self.const_tokens = nn.Parameter(
                torch.randn(config.n_learnable_const, config.d_model) * 0.02)
            self.in_proj = nn.Linear(latent_dim, config.d_model)
            layer = nn.TransformerEncoderLayer(
                d_model=config.d_model, nhead=4,
                dim_feedforward=config.d_model * 2, dropout=0.0,
                batch_first=True, norm_first=True)
            self.blocks = nn.TransformerEncoder(layer, num_layers=config.n_attn_blocks,
                                                enable_nested_tensor=False)

    def lift_and_concat(self, framewise: torch.Tensor, latent: torch.Tensor) -> torch.Tensor:
        """(T', C) presence + (L,) latent -> (T'+1, L); latent is row 0."""
        if framewise.ndim != 2 or framewise.shape[1] != self.n_classes:
            raise ShapeError(f"framewise must be (T', {self.n_classes}), "
                             f"got {tuple(framewise.shape)}")
        if latent.shape != (self.latent_dim,):
            raise ShapeError(f"latent must be ({self.latent_dim},), got {tuple(latent.shape)}")
        return torch.cat([latent.unsqueeze(0), self.lift(framewise)], dim=0)

    def project(self, x: torch.Tensor) -> torch.Tensor:
        """(rows, L) -> (rows, d_model); transformer_const returns (n_const, d_model)."""
        if x.ndim != 2 or x.shape[1] != self.latent_dim:
            raise ShapeError(f"expected (rows, {self.latent_dim}), got {tuple(x.shape)}")
        kind = self.config.projection_kind
        if kind == "linear":
            return self.proj(x)
        if kind == "nonlinear":
            return self.norm(self.proj_a(x) + self.proj_b(x))
        seq = torch.cat([self.const_tokens.to(x.dtype), self.in_proj(x)], dim=0)
        out = self.blocks(seq.unsqueeze(0)).squeeze(0)
        return out[: self.config.n_learnable_const]

    def forward(self, framewise: torch.Tensor, latent: torch.Tensor) -> AudioEmbedding:
        lifted = self.lift_and_concat(framewise, latent)
        projected = self.project(lifted)
        if self.config.projection_kind == "transformer_const":
            return AudioEmbedding(tokens=projected, cls_index=0)
        return AudioEmbedding(
            tokens=downsample_rows(projected, self.config.downsample_factor),
            cls_index=0)

    def projection_param_count(self) -> int:
        """Parameters in the projection stage only (excluding the lift layer)."""
        kind = self.config.projection_kind
        d, l = self.config.d_model, self.latent_dim
        if kind == "linear":
            return l * d + d
        if kind == "nonlinear":
            return 2 * (l * d + d) + 2 * d
        return sum(p.numel() for p in self.parameters()) - sum(
            p.numel() for p in self.lift.parameters())
