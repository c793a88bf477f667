"""Training loop: Adam over summed next-token cross-entropy.

The loop is single-threaded and the batch order is a pure function of the
seed, so two runs from the same seed and data produce the same checkpoints.
Parameter selection (frozen / lora / full) happens once up front through the
freeze contract in aqalab.lora.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import QAQuadruple
from .errors import ConfigError, DataError
from .lora import trainable_parameters
from .loss import LOSS_SCOPES, compute_loss
from .pipeline import AlmPipeline
from .schedule import cosine_lr


@dataclass
class TrainConfig:
    max_lr: float = 1e-3
    epochs: int = 30
    batch_size: int = 8
    seed: int = 0
    mode: str = "full"                  # {frozen, lora, full}
    loss_scope: str = "answer_only"     # {answer_only, full_sequence}
    warmup_frac: float = 0.05
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    include_encoder: bool | None = None  # None: encoder trains in full mode only
    checkpoint_dir: str | None = None
    checkpoint_every: int = 1            # epochs between checkpoints

    def validate(self) -> None:
        if self.max_lr <= 0:
            raise ConfigError("max_lr must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.mode not in ("frozen", "lora", "full"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.loss_scope not in LOSS_SCOPES:
            raise ConfigError(f"unknown loss_scope {self.loss_scope!r}")

    @property
    def encoder_trains(self) -> bool:
        if self.include_encoder is None:
            return self.mode == "full"
        return self.include_encoder


@dataclass
class TrainState:
    step: int = 0
    epoch: int = 0
    loss_history: list[float] = field(default_factory=list)
    epoch_mean_losses: list[float] = field(default_factory=list)
    lr_history: list[float] = field(default_factory=list)
    checkpoint_paths: list[str] = field(default_factory=list)


def train(rows: list[QAQuadruple], pipeline: AlmPipeline,
          config: TrainConfig) -> TrainState:
    """Run the full schedule over the manifest rows; returns the trace.

    Writes one checkpoint per epoch (plus a loss-curve CSV) when
    config.checkpoint_dir is set.
    """
    config.validate()
    if not rows:
        raise DataError("no training rows")
    for row in rows:
        row.validate()

    torch.manual_seed(config.seed)
    order_rng = np.random.default_rng(config.seed)

    encoder = pipeline.encoder if hasattr(pipeline.encoder, "parameters") else None
    params = trainable_parameters(pipeline.lm, pipeline.mapper, encoder,
                                  mode=config.mode,
                                  include_encoder=config.encoder_trains)
    opt = torch.optim.Adam(params.values(), lr=config.max_lr,
                           betas=config.adam_betas, eps=config.adam_eps)

    n = len(rows)
    steps_per_epoch = math.ceil(n / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    state = TrainState()

    ckpt_dir = Path(config.checkpoint_dir) if config.checkpoint_dir else None
    csv_writer = csv_file = None
    if ckpt_dir:
        ckpt_dir.mkdir(parents=True, exist_ok=True)
        csv_file = open(ckpt_dir / "loss_curve.csv", "w", newline="")
        csv_writer = csv.writer(csv_file)
        csv_writer.writerow(["step", "epoch", "lr", "batch_loss"])

    try:
        for epoch in range(config.epochs):
            state.epoch = epoch
            perm = order_rng.permutation(n)
            for b in range(steps_per_epoch):
                batch_idx = perm[b * config.batch_size : (b + 1) * config.batch_size]
                batch = [pipeline.encode_example(rows[i]) for i in batch_idx]
                lr = cosine_lr(state.step, total_steps, config.max_lr,
                               config.warmup_frac)
                for group in opt.param_groups:
                    group["lr"] = lr
                loss = compute_loss(batch, pipeline.lm, config.loss_scope)
                opt.zero_grad()
                loss.backward()
                opt.step()
                val = float(loss.detach())
                state.loss_history.append(val)
                state.lr_history.append(lr)
                if csv_writer:
                    csv_writer.writerow([state.step, epoch, f"{lr:.10g}", f"{val:.8g}"])
                state.step += 1
            state.epoch_mean_losses.append(
                float(np.mean(state.loss_history[-steps_per_epoch:])))
            if ckpt_dir and (epoch + 1) % config.checkpoint_every == 0:
                path = str(ckpt_dir / f"epoch_{epoch:03d}.pt")
                pipeline.save(path)
                state.checkpoint_paths.append(path)
    finally:
        if csv_file:
            csv_file.close()
    return state
