"""Cosine learning-rate schedule with linear warmup.

Closed form, with W = floor(warmup_frac * total_steps):

    t <  W:  lr = max_lr * t / W
    t >= W:  lr = max_lr * 0.5 * (1 + cos(pi * (t - W) / (total_steps - W)))

With no warmup, lr(0) = max_lr; the last step lands near (not exactly at)
zero since t only reaches total_steps - 1.
"""

from __future__ import annotations

import math

from .errors import ConfigError


def cosine_lr(step: int, total_steps: int, max_lr: float,
              warmup_frac: float = 0.05) -> float:
    if total_steps < 1:
        raise ConfigError("total_steps must be >= 1")
    if not 0 <= step < total_steps:
        raise ConfigError(f"step {step} outside [0, {total_steps})")
    if max_lr <= 0:
        raise ConfigError("max_lr must be positive")
    if not 0.0 <= warmup_frac < 1.0:
        raise ConfigError("warmup_frac must be in [0, 1)")
    warmup = int(warmup_frac * total_steps)
    if step < warmup:
        return max_lr * step / warmup
    span = max(total_steps - warmup, 1)
    return max_lr * 0.5 * (1.0 + math.cos(math.pi * (step - warmup) / span))
