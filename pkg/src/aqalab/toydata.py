"""Deterministic toy corpus: synthetic tones plus question-answer rows.

Four acoustically distinct sound classes (hum, tone, whistle, sweep) give
tasks whose answers are decidable only from the audio, which is exactly
what the overfit sanity run and the noise-reliance probe need. Everything
is a pure function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io.wavfile

from .audio import CANONICAL_RATE_HZ
from .data import QAQuadruple
from .tokenizer import Tokenizer, train_tokenizer

TOY_CLASSES = ("low hum", "mid tone", "high whistle", "rising sweep")
_FREQS = (150.0, 880.0, 3520.0, None)  # None: 200 -> 4000 Hz sweep

MCQ_QUESTION = ("Which sound is present in the clip? "
                "A) low hum B) mid tone C) high whistle D) rising sweep")
MCQ_ANSWERS = ("A) low hum", "B) mid tone", "C) high whistle", "D) rising sweep")

_PITCH_WORD = ("low", "mid", "high", "rising")


@dataclass
class ToyClip:
    path: str
    class_idx: int

    @property
    def class_name(self) -> str:
        return TOY_CLASSES[self.class_idx]


def synth_wave(class_idx: int, variant: int, seconds: float = 10.0) -> np.ndarray:
    """One clip of the given class; the variant shifts phase and amplitude."""
    n = int(seconds * CANONICAL_RATE_HZ)
    t = np.arange(n) / CANONICAL_RATE_HZ
    phase = 0.61803 * variant
    amp = 0.4 + 0.08 * (variant % 4)
    freq = _FREQS[class_idx]
    if freq is None:
        f0, f1 = 200.0, 4000.0
        inst = f0 * (f1 / f0) ** (t / seconds)          # log sweep
        angle = 2 * math.pi * np.cumsum(inst) / CANONICAL_RATE_HZ
        wave = np.sin(angle + phase)
    else:
        wave = np.sin(2 * math.pi * freq * t + phase)
    return (amp * wave).astype(np.float64)


def write_toy_audio(out_dir: str, per_class: int = 4, seed: int = 0) -> list[ToyClip]:
    """Write per_class wav files for each class; names encode class + variant."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    clips = []
    for ci in range(len(TOY_CLASSES)):
        for v in range(per_class):
            wave = synth_wave(ci, seed * 101 + v)
            path = root / f"toy_c{ci}_v{v}.wav"
            scipy.io.wavfile.write(str(path), CANONICAL_RATE_HZ,
                                   (wave * 32767).astype(np.int16))
            clips.append(ToyClip(path=str(path), class_idx=ci))
    return clips


def mcq_row(clip: ToyClip) -> QAQuadruple:
    return QAQuadruple(
        audio1_id=clip.path, audio2_id="",
        question=MCQ_QUESTION, answer=MCQ_ANSWERS[clip.class_idx],
        task="synth_mcq", source="type1")


def detail_rows(clip: ToyClip) -> list[QAQuadruple]:
    name = clip.class_name
    pitch = _PITCH_WORD[clip.class_idx]
    qa = [
        ("Describe the audio.", f"a steady {name} plays throughout the clip."),
        ("What do you hear in this recording?", f"the clip contains a {name}."),
        ("Is the pitch of this sound low, mid, high, or rising?", f"{pitch}."),
    ]
    return [QAQuadruple(audio1_id=clip.path, audio2_id="", question=q, answer=a,
                        task="synth_detail", source="type1") for q, a in qa]


def overfit_corpus(audio_dir: str, seed: int = 0) -> list[QAQuadruple]:
    """16 clips x (1 MCQ + 3 descriptive) = 64 quadruples."""
    clips = write_toy_audio(audio_dir, per_class=4, seed=seed)
    rows = []
    for clip in clips:
        rows.append(mcq_row(clip))
        rows.extend(detail_rows(clip))
    assert len(rows) == 64
    return rows


def mcq_corpus(audio_dir: str, per_class: int = 4, seed: int = 0) -> list[QAQuadruple]:
    """Balanced audio-determined MCQ rows (one per clip, fixed option order)."""
    return [mcq_row(c) for c in write_toy_audio(audio_dir, per_class=per_class, seed=seed)]


def toy_tokenizer(rows: list[QAQuadruple], n_merges: int = 64) -> Tokenizer:
    texts = [r.question for r in rows] + [r.answer for r in rows]
    return train_tokenizer(texts, n_merges=n_merges)
