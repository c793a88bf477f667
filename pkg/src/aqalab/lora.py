"""Low-rank adapters for the decoder's attention projections.

Each wrapped linear computes W x + b + (alpha / rank) * B (A x) with
A: (rank, d_in) and B: (d_out, rank). B starts at zero, so a freshly
adapted model is bitwise-identical to its base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn

from .errors import ConfigError
from .lm import DecoderLM

# target name -> attribute on CausalSelfAttention
_TARGET_ATTRS = {
    "query": "q_proj",
    "key": "k_proj",
    "value": "v_proj",
    "output": "out_proj",
}


@dataclass
class LoraConfig:
    rank: int = 8
    alpha: float = 16.0
    targets: tuple[str, ...] = ("query", "key")

    def validate(self) -> None:
        if self.rank < 1:
            raise ConfigError("rank must be >= 1")
        if not self.targets:
            raise ConfigError("targets must be non-empty")
        for t in self.targets:
            if t not in _TARGET_ATTRS:
                raise ConfigError(f"unknown LoRA target {t!r}; "
                                  f"known: {sorted(_TARGET_ATTRS)}")

    @property
    def scaling(self) -> float:
        return self.alpha / self.rank


class LoraLinear(nn.Module):
    def __init__(self, base: nn.Linear, config: LoraConfig):
        super().__init__()
        self.base = base
        self.scaling = config.scaling
        self.lora_a = nn.Parameter(torch.empty(config.rank, base.in_features))
        self.lora_b = nn.Parameter(torch.zeros(base.out_features, config.rank))
        nn.init.kaiming_uniform_(self.lora_a, a=math.sqrt(5))
        self.lora_a.data = self.lora_a.data.to(base.weight.dtype)
        self.lora_b.data = self.lora_b.data.to(base.weight.dtype)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.base(x) + (x @ self.lora_a.T @ self.lora_b.T) * self.scaling

    @property
    def added_params(self) -> int:
        return self.lora_a.numel() + self.lora_b.numel()


def apply_lora(lm: DecoderLM, config: LoraConfig) -> DecoderLM:
    """Wrap the configured attention projections of every block, in place."""
    config.validate()
    for block in lm.blocks:
        for target in config.targets:
            attr = _TARGET_ATTRS[target]
            base = getattr(block.attn, attr)
            if isinstance(base, LoraLinear):
                raise ConfigError(f"{attr} already has an adapter")
            setattr(block.attn, attr, LoraLinear(base, config))
    return lm


def lora_param_count(n_layers: int, layer_dims: dict[str, tuple[int, int]],
                     rank: int) -> int:
    """Closed-form count of adapter parameters.

    layer_dims maps target name -> (d_in, d_out) for one block; every block
    contributes rank * (d_in + d_out) per target.
    """
    return n_layers * sum(rank * (d_in + d_out) for d_in, d_out in layer_dims.values())


def count_adapter_params(lm: DecoderLM) -> int:
    return sum(m.added_params for m in lm.modules() if isinstance(m, LoraLinear))


def adapter_param_names(lm: DecoderLM) -> list[str]:
    return [n for n, _ in lm.named_parameters()
            if n.endswith("lora_a") or n.endswith("lora_b")]


def trainable_parameters(lm: DecoderLM, mapper: nn.Module | None = None,
                         encoder: nn.Module | None = None, mode: str = "frozen",
                         include_encoder: bool = False) -> dict[str, nn.Parameter]:
    """Select and flag the parameters a training run may update.

    frozen: mapper only. lora: mapper + adapter matrices. full: mapper + the
    whole LM. The encoder joins any mode when include_encoder is set. All
    other parameters get requires_grad=False, which is the freeze contract
    the trainer relies on.
    """
    if mode not in ("frozen", "lora", "full"):
        raise ConfigError(f"unknown mode {mode!r}")
    if mode == "lora" and not any(isinstance(m, LoraLinear) for m in lm.modules()):
        raise ConfigError("mode 'lora' but no adapters applied; call apply_lora first")

    selected: dict[str, nn.Parameter] = {}
    for name, p in lm.named_parameters():
        is_adapter = name.endswith("lora_a") or name.endswith("lora_b")
        keep = mode == "full" or (mode == "lora" and is_adapter)
        p.requires_grad_(keep)
        if keep:
            selected[f"lm.{name}"] = p
    if mapper is not None:
        for name, p in mapper.named_parameters():
            p.requires_grad_(True)
            selected[f"mapper.{name}"] = p
    if encoder is not None and hasattr(encoder, "named_parameters"):
        for name, p in encoder.named_parameters():
            p.requires_grad_(include_encoder)
            if include_encoder:
                selected[f"encoder.{name}"] = p
    return selected
