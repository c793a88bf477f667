"""Audio encoders: framewise event-presence probabilities plus a latent vector.

Two small trainable encoders (conv and transformer) stand in for large
pretrained audio backbones. Both emit the same contract: a (T', n_classes)
matrix of per-class presence probabilities over time (sigmoid-squashed) and
a latent summary vector. A third variant reads precomputed outputs from
disk, which lets frozen-encoder experiments run without any weights at all.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from .audio import LogMelSpec
from .errors import ConfigError, DataError, FormatError, ShapeError

ENCODER_KINDS = ("toy_transformer", "toy_conv", "file_adapter")


@dataclass
class EncoderOutput:
    """The encoder contract: presence probabilities over time + latent summary."""

    framewise: np.ndarray          # (T', n_classes), entries in [0, 1]
    latent: np.ndarray             # (latent_dim,)
    class_names: list[str]

    def validate(self) -> None:
        if self.framewise.ndim != 2 or self.latent.ndim != 1:
            raise ShapeError("framewise must be 2-d and latent 1-d")
        if self.framewise.shape[0] < 1 or self.framewise.shape[1] < 1:
            raise ShapeError(f"degenerate framewise shape {self.framewise.shape}")
        if len(self.class_names) != self.framewise.shape[1]:
            raise ShapeError("class_names length must match framewise columns")
        if not np.all(np.isfinite(self.latent)):
            raise ShapeError("latent has non-finite entries")
        lo, hi = float(self.framewise.min()), float(self.framewise.max())
        if lo < 0.0 or hi > 1.0:
            raise ShapeError(f"framewise outside [0,1]: min={lo} max={hi}")


@dataclass
class EncoderConfig:
    kind: str = "toy_conv"
    n_classes: int = 16
    latent_dim: int = 32
    depth: int = 2
    width: int = 64
    trainable: bool = True
    n_mels: int = 64
    time_patch: int = 8            # toy_transformer: mel frames per token
    output_dir: str | None = None  # file_adapter only
    class_names: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if self.kind not in ENCODER_KINDS:
            raise ConfigError(f"unknown encoder kind {self.kind!r}")
        for name in ("n_classes", "latent_dim", "depth", "width", "n_mels", "time_patch"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.kind == "file_adapter" and not self.output_dir:
            raise ConfigError("file_adapter needs output_dir")
        if self.class_names and len(self.class_names) != self.n_classes:
            raise ConfigError("class_names length must equal n_classes")

    def resolved_class_names(self) -> list[str]:
        if self.class_names:
            return list(self.class_names)
        return [f"class_{i:02d}" for i in range(self.n_classes)]


class ToyConvEncoder(nn.Module):
    """Stack of stride-2 temporal convolutions over the mel frames.

    T' = ceil(T / 2**depth). Presence head is per-frame linear + sigmoid;
    latent head is a linear map of the time-averaged features.
    """

    def __init__(self, config: EncoderConfig):
        super().__init__()
        config.validate()
        self.config = config
        self.min_frames = 2 ** config.depth
        self.stem = nn.Conv1d(config.n_mels, config.width, kernel_size=1)
        blocks = []
        for _ in range(config.depth):
            blocks.append(nn.Conv1d(config.width, config.width,
                                    kernel_size=5, stride=2, padding=2))
            blocks.append(nn.GELU())
        self.blocks = nn.Sequential(*blocks)
        self.presence_head = nn.Linear(config.width, config.n_classes)
        self.latent_head = nn.Linear(config.width, config.latent_dim)

    def forward(self, mel: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """mel: (T, n_mels) -> (framewise (T', n_classes), latent (latent_dim,))."""
        if mel.ndim != 2 or mel.shape[1] != self.config.n_mels:
            raise ShapeError(f"expected (T, {self.config.n_mels}), got {tuple(mel.shape)}")
        if mel.shape[0] < self.min_frames:
            raise ShapeError(f"need at least {self.min_frames} frames, got {mel.shape[0]}")
        h = self.stem(mel.T.unsqueeze(0))       # (1, width, T)
        h = self.blocks(h).squeeze(0).T          # (T', width)
        framewise = torch.sigmoid(self.presence_head(h))
        latent = self.latent_head(h.mean(dim=0))
        return framewise, latent


class ToyTransformerEncoder(nn.Module):
    """Patchify mel frames along time, then a few self-attention blocks.

    A learned CLS token is prepended; its final state feeds the latent head.
    T' = ceil(T / time_patch). Positions are sinusoidal so any length works.
    """

    def __init__(self, config: EncoderConfig):
        super().__init__()
        config.validate()
        self.config = config
        self.min_frames = config.time_patch
        self.patch_proj = nn.Linear(config.n_mels * config.time_patch, config.width)
        self.cls_token = nn.Parameter(torch.zeros(1, 1, config.width))
        layer = nn.TransformerEncoderLayer(
            d_model=config.width, nhead=4, dim_feedforward=config.width * 2,
            dropout=0.0, batch_first=True, norm_first=True)
        self.blocks = nn.TransformerEncoder(layer, num_layers=config.depth,
                                            enable_nested_tensor=False)
        self.presence_head = nn.Linear(config.width, config.n_classes)
        self.latent_head = nn.Linear(config.width, config.latent_dim)

    @staticmethod
    def _sinusoid(n: int, dim: int, dtype: torch.dtype) -> torch.Tensor:
        pos = torch.arange(n, dtype=dtype).unsqueeze(1)
        div = torch.exp(torch.arange(0, dim, 2, dtype=dtype) * (-math.log(10000.0) / dim))
        pe = torch.zeros(n, dim, dtype=dtype)
        pe[:, 0::2] = torch.sin(pos * div)
        pe[:, 1::2] = torch.cos(pos * div[: (dim + 1) // 2])
        return pe

    def forward(self, mel: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        cfg = self.config
        if mel.ndim != 2 or mel.shape[1] != cfg.n_mels:
            raise ShapeError(f"expected (T, {cfg.n_mels}), got {tuple(mel.shape)}")
        t = mel.shape[0]
        if t < self.min_frames:
            raise ShapeError(f"need at least {self.min_frames} frames, got {t}")
        n_patch = (t + cfg.time_patch - 1) // cfg.time_patch
        padded = torch.zeros(n_patch * cfg.time_patch, cfg.n_mels, dtype=mel.dtype)
        padded[:t] = mel
        tokens = self.patch_proj(padded.reshape(n_patch, cfg.time_patch * cfg.n_mels))
        tokens = tokens + self._sinusoid(n_patch, cfg.width, tokens.dtype)
        seq = torch.cat([self.cls_token.to(tokens.dtype).squeeze(0), tokens], dim=0)
        out = self.blocks(seq.unsqueeze(0)).squeeze(0)
        framewise = torch.sigmoid(self.presence_head(out[1:]))
        latent = self.latent_head(out[0])
        return framewise, latent


class FileAdapterEncoder:
    """Reads precomputed encoder outputs keyed by the clip's source id stem."""

    def __init__(self, config: EncoderConfig):
        config.validate()
        if config.kind != "file_adapter":
            raise ConfigError("FileAdapterEncoder requires kind='file_adapter'")
        self.config = config
        self.output_dir = Path(config.output_dir)

    def path_for(self, source_id: str) -> Path:
        if not source_id:
            raise DataError("clip has no source_id; file_adapter cannot resolve it")
        return self.output_dir / (Path(source_id).stem + ".enc")

    def encode(self, spec: LogMelSpec) -> EncoderOutput:
        path = self.path_for(spec.source_id)
        if not path.exists():
            raise DataError(f"no precomputed encoder output at {path}")
        return load_output(str(path))


def build_encoder(config: EncoderConfig):
    config.validate()
    if config.kind == "toy_conv":
        return ToyConvEncoder(config)
    if config.kind == "toy_transformer":
        return ToyTransformerEncoder(config)
    return FileAdapterEncoder(config)


def encode(spec: LogMelSpec, encoder) -> EncoderOutput:
    """Run an encoder over a log-mel spectrogram, returning the output contract."""
    if isinstance(encoder, FileAdapterEncoder):
        out = encoder.encode(spec)
        out.validate()
        return out
    mel = torch.from_numpy(np.asarray(spec.frames)).to(
        next(encoder.parameters()).dtype)
    with torch.no_grad():
        framewise, latent = encoder(mel)
    out = EncoderOutput(
        framewise=framewise.numpy().astype(np.float64),
        latent=latent.numpy().astype(np.float64),
        class_names=encoder.config.resolved_class_names(),
    )
    out.validate()
    return out


_MAGIC = b"AQAENC1\n"


def save_output(out: EncoderOutput, path: str) -> None:
    """Self-describing binary record: magic, JSON header, row-major float64 payload."""
    out.validate()
    header = {
        "t_frames": int(out.framewise.shape[0]),
        "n_classes": int(out.framewise.shape[1]),
        "latent_dim": int(out.latent.shape[0]),
        "class_names": list(out.class_names),
        "dtype": "float64",
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(np.ascontiguousarray(out.framewise, dtype=np.float64).tobytes())
        f.write(np.ascontiguousarray(out.latent, dtype=np.float64).tobytes())


def load_output(path: str) -> EncoderOutput:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) < len(_MAGIC) + 4 or raw[: len(_MAGIC)] != _MAGIC:
        raise FormatError(f"{path}: not an encoder-output file")
    off = len(_MAGIC)
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    if off + hlen > len(raw):
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[off : off + hlen].decode("utf-8"))
        t, c, l = header["t_frames"], header["n_classes"], header["latent_dim"]
        names = header["class_names"]
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: bad header: {exc}") from exc
    off += hlen
    need = (t * c + l) * 8
    if len(raw) - off != need:
        raise FormatError(f"{path}: payload is {len(raw) - off} bytes, expected {need}")
    flat = np.frombuffer(raw, dtype="<f8", offset=off)
    out = EncoderOutput(
        framewise=flat[: t * c].reshape(t, c).copy(),
        latent=flat[t * c :].copy(),
        class_names=list(names),
    )
    out.validate()
    return out
