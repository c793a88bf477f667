"""The assembled model: frontend config, encoder, mapper, LM, tokenizer.

This bundle owns the wav -> mel -> encoder -> mapper -> prefix wiring that
both the trainer and the sampler need, plus whole-model checkpointing.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .audio import AudioClip, LogMelSpec, MelConfig, load_clip, log_mel, normalize_clip
from .data import QAQuadruple
from .encoder import EncoderConfig, FileAdapterEncoder, build_encoder
from .errors import DataError, FormatError
from .lm import DecoderLM, LMConfig
from .lora import LoraConfig, apply_lora
from .mapper import AudioEmbedding, Mapper, MapperConfig
from .prefix import PrefixEmbedding, build_prefix
from .tokenizer import Tokenizer

CHECKPOINT_FORMAT = "aqalab-ckpt-v1"


@dataclass
class EncodedExample:
    """One training example, ready for the LM: prefix + token targets."""

    prefix: PrefixEmbedding
    question_ids: list[int]
    answer_ids: list[int]  # eos-terminated


class AlmPipeline:
    def __init__(self, mel_config: MelConfig, encoder, mapper: Mapper,
                 lm: DecoderLM, tokenizer: Tokenizer,
                 lora_config: LoraConfig | None = None):
        self.mel_config = mel_config
        self.encoder = encoder
        self.mapper = mapper
        self.lm = lm
        self.tokenizer = tokenizer
        self.lora_config = lora_config
        self._mel_cache: dict[str, np.ndarray] = {}

    @classmethod
    def build(cls, mel_config: MelConfig, encoder_config: EncoderConfig,
              mapper_config: MapperConfig, lm_config: LMConfig,
              tokenizer: Tokenizer, seed: int = 0,
              lora_config: LoraConfig | None = None) -> "AlmPipeline":
        torch.manual_seed(seed)
        encoder = build_encoder(encoder_config)
        mapper = Mapper(mapper_config, latent_dim=encoder_config.latent_dim,
                        n_classes=encoder_config.n_classes)
        lm = DecoderLM(lm_config)
        if lora_config is not None:
            apply_lora(lm, lora_config)
        return cls(mel_config, encoder, mapper, lm, tokenizer, lora_config)

    # ---- audio -> prefix ----

    def _mel_frames(self, audio_ref: str | AudioClip) -> tuple[np.ndarray, str]:
        if isinstance(audio_ref, AudioClip):
            clip = normalize_clip(audio_ref)
            return log_mel(clip, self.mel_config).frames, clip.source_id
        cached = self._mel_cache.get(audio_ref)
        if cached is not None:
            return cached, audio_ref
        try:
            clip = load_clip(audio_ref)
        except FileNotFoundError as exc:
            raise DataError(f"audio file not found: {audio_ref}") from exc
        frames = log_mel(clip, self.mel_config).frames
        if len(self._mel_cache) < 1024:
            self._mel_cache[audio_ref] = frames
        return frames, audio_ref

    def audio_embedding(self, audio_ref: str | AudioClip) -> AudioEmbedding:
        """wav path (or in-memory clip) -> mapped prefix tokens."""
        frames, source_id = self._mel_frames(audio_ref)
        if isinstance(self.encoder, FileAdapterEncoder):
            spec = LogMelSpec(frames=frames, hop_s=self.mel_config.hop_s,
                              mel_bins=self.mel_config.n_mels, source_id=source_id)
            out = self.encoder.encode(spec)
            dtype = next(self.mapper.parameters()).dtype
            framewise = torch.from_numpy(out.framewise).to(dtype)
            latent = torch.from_numpy(out.latent).to(dtype)
        else:
            dtype = next(self.encoder.parameters()).dtype
            mel = torch.from_numpy(frames).to(dtype)
            framewise, latent = self.encoder(mel)
        return self.mapper(framewise, latent)

    def encode_example(self, quad: QAQuadruple) -> EncodedExample:
        a1 = self.audio_embedding(quad.audio1_id)
        a2 = self.audio_embedding(quad.audio2_id) if quad.audio2_id else None
        question_ids = self.tokenizer.encode(quad.question)
        prefix = build_prefix(a1, a2, question_ids, self.lm)
        answer_ids = self.tokenizer.encode(quad.answer, add_eos=True)
        return EncodedExample(prefix=prefix, question_ids=question_ids,
                              answer_ids=answer_ids)

    def prefix_for_prompt(self, audio1: str | AudioClip,
                          audio2: str | AudioClip | None,
                          prompt: str) -> PrefixEmbedding:
        a1 = self.audio_embedding(audio1)
        a2 = self.audio_embedding(audio2) if audio2 is not None else None
        return build_prefix(a1, a2, self.tokenizer.encode(prompt), self.lm)

    # ---- persistence ----

    def save(self, path: str) -> None:
        enc_cfg = self.encoder.config
        payload = {
            "format": CHECKPOINT_FORMAT,
            "mel_config": asdict(self.mel_config),
            "encoder_config": asdict(enc_cfg),
            "mapper_config": asdict(self.mapper.config),
            "lm_config": asdict(self.lm.config),
            "lora_config": asdict(self.lora_config) if self.lora_config else None,
            "tokenizer": self.tokenizer.to_dict(),
            "mapper_state": self.mapper.state_dict(),
            "lm_state": self.lm.state_dict(),
            "encoder_state": (self.encoder.state_dict()
                              if isinstance(self.encoder, torch.nn.Module) else None),
        }
        torch.save(payload, path)

    @classmethod
    def load(cls, path: str) -> "AlmPipeline":
        try:
            payload = torch.load(path, map_location="cpu", weights_only=False)
        except Exception as exc:
            raise FormatError(f"cannot load checkpoint {path}: {exc}") from exc
        if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
            raise FormatError(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
        mel_config = MelConfig(**payload["mel_config"])
        encoder_config = EncoderConfig(**payload["encoder_config"])
        mapper_config = MapperConfig(**payload["mapper_config"])
        lm_config = LMConfig(**payload["lm_config"])
        lora_config = (LoraConfig(**{**payload["lora_config"],
                                     "targets": tuple(payload["lora_config"]["targets"])})
                       if payload["lora_config"] else None)
        tokenizer = Tokenizer.from_dict(payload["tokenizer"])

        encoder = build_encoder(encoder_config)
        mapper = Mapper(mapper_config, latent_dim=encoder_config.latent_dim,
                        n_classes=encoder_config.n_classes)
        lm = DecoderLM(lm_config)
        if lora_config is not None:
            apply_lora(lm, lora_config)
        mapper.load_state_dict(payload["mapper_state"])
        lm.load_state_dict(payload["lm_state"])
        if payload["encoder_state"] is not None:
            encoder.load_state_dict(payload["encoder_state"])
        return cls(mel_config, encoder, mapper, lm, tokenizer, lora_config)
