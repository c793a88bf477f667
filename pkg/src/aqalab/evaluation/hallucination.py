"""Side-by-side evidence for auditing generated descriptions.

One report per example: the log-mel matrix, the encoder's top-k class
probability traces over time, and the generated text. Everything lands in
a single JSON file that plotting notebooks can consume offline; a claim in
the text with no supporting trace above threshold is a hallucination
candidate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..audio import CLIP_SECONDS, AudioClip, MelConfig, load_clip, log_mel, normalize_clip
from ..encoder import encode
from ..errors import DataError, FormatError

REPORT_FORMAT = "aqalab-halluc-v1"


@dataclass
class EventTimeline:
    """Per-frame class probabilities with uniform frame-center times."""

    times: list[float]
    probs: np.ndarray  # (T', C) in [0, 1]
    class_names: list[str]
    top_k: list[int] = field(default_factory=list)

    def validate(self) -> None:
        probs = np.asarray(self.probs)
        if probs.ndim != 2:
            raise DataError(f"probs must be 2-D, got shape {probs.shape}")
        if len(self.times) != probs.shape[0]:
            raise DataError(f"{len(self.times)} times vs {probs.shape[0]} frames")
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
            raise DataError("probabilities outside [0, 1]")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DataError("times must be strictly increasing")
        if len(probs.shape) == 2 and len(self.class_names) != probs.shape[1]:
            raise DataError(f"{len(self.class_names)} names vs "
                            f"{probs.shape[1]} classes")
        for idx in self.top_k:
            if not 0 <= idx < probs.shape[1]:
                raise DataError(f"top_k index {idx} out of range")


def top_classes(probs: np.ndarray, k: int = 3) -> list[int]:
    """Indices of the k classes with highest mean probability over time,
    highest first, ties broken toward the lower class index."""
    means = np.asarray(probs, dtype=np.float64).mean(axis=0)
    k = min(k, means.shape[0])
    order = np.lexsort((np.arange(means.shape[0]), -means))
    return [int(i) for i in order[:k]]


@dataclass
class HallucinationReport:
    source_id: str
    generated_text: str
    mel: np.ndarray  # (T, n_mels) log-mel frames
    mel_hop_s: float
    timeline: EventTimeline

    def validate(self) -> None:
        self.timeline.validate()
        if np.asarray(self.mel).ndim != 2:
            raise DataError("mel must be 2-D")

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "source_id": self.source_id,
            "generated_text": self.generated_text,
            "mel": np.asarray(self.mel).tolist(),
            "mel_hop_s": self.mel_hop_s,
            "times": list(self.timeline.times),
            "probs": np.asarray(self.timeline.probs).tolist(),
            "class_names": list(self.timeline.class_names),
            "top_k": list(self.timeline.top_k),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "HallucinationReport":
        if payload.get("format") != REPORT_FORMAT:
            raise FormatError(f"not a hallucination report: "
                              f"format={payload.get('format')!r}")
        report = cls(
            source_id=payload["source_id"],
            generated_text=payload["generated_text"],
            mel=np.asarray(payload["mel"], dtype=np.float64),
            mel_hop_s=payload["mel_hop_s"],
            timeline=EventTimeline(
                times=list(payload["times"]),
                probs=np.asarray(payload["probs"], dtype=np.float64),
                class_names=list(payload["class_names"]),
                top_k=list(payload["top_k"]),
            ),
        )
        report.validate()
        return report

    def save(self, path: str) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str) -> "HallucinationReport":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
        return cls.from_dict(payload)


def hallucination_report(clip: AudioClip | str, generated: str, encoder,
                         mel_config: MelConfig | None = None,
                         top_k: int = 3) -> HallucinationReport:
    """Bundle the evidence for one generation into a report.

    The encoder's framewise presence probabilities are timestamped at
    uniform frame centers across the clip; the top_k traces (by mean
    probability) are flagged for overlay plotting.
    """
    mel_config = mel_config or MelConfig()
    if isinstance(clip, str):
        clip = load_clip(clip)
    clip = normalize_clip(clip)
    spec = log_mel(clip, mel_config)
    out = encode(spec, encoder)
    t_frames = out.framewise.shape[0]
    times = [(j + 0.5) * CLIP_SECONDS / t_frames for j in range(t_frames)]
    timeline = EventTimeline(
        times=times,
        probs=out.framewise,
        class_names=list(out.class_names),
        top_k=top_classes(out.framewise, top_k),
    )
    report = HallucinationReport(
        source_id=clip.source_id,
        generated_text=generated,
        mel=spec.frames,
        mel_hop_s=mel_config.hop_s,
        timeline=timeline,
    )
    report.validate()
    return report
