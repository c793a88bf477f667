"""Corpus statistics over question-answer rows.

Tokenization is deliberately crude and fully specified: lowercase, strip
punctuation from token edges, split on whitespace. Lengths are mean word
counts, vocabularies are distinct-token counts, and the audio-word table
counts hits against a configurable lexicon of listening vocabulary.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field

from ..data import QAQuadruple

AUDIO_LEXICON = (
    "sound", "sounds", "audio", "noise", "noises", "hear", "heard", "hearing",
    "loud", "quiet", "soft", "pitch", "tone", "hum", "humming", "buzz",
    "buzzing", "music", "musical", "voice", "voices", "speech", "speaking",
    "bark", "barking", "chirp", "chirping", "rustling", "whoosh", "whooshing",
    "clip", "recording", "background", "volume", "frequency", "rhythm",
    "melody", "echo", "silence", "silent", "ringing", "crash", "crashing",
    "whistle", "whistling", "roar", "roaring", "siren", "engine", "wind",
    "rain", "thunder", "splash", "splashing", "footsteps", "knock", "knocking",
)

_STRIP = string.punctuation + "‘’“”"


def words(text: str) -> list[str]:
    """Lowercase, strip punctuation off token edges, split on whitespace."""
    out = []
    for tok in text.lower().split():
        tok = tok.strip(_STRIP)
        if tok:
            out.append(tok)
    return out


@dataclass
class SubsetStats:
    n_pairs: int
    mean_question_words: float
    question_vocab: int
    mean_answer_words: float
    answer_vocab: int


@dataclass
class CorpusStats:
    subsets: dict[str, SubsetStats] = field(default_factory=dict)
    audio_word_counts: dict[str, int] = field(default_factory=dict)
    total_pairs: int = 0

    def lines(self) -> list[str]:
        out = [f"total pairs: {self.total_pairs}"]
        for name in sorted(self.subsets):
            s = self.subsets[name]
            out.append(
                f"  {name}: {s.n_pairs} pairs | Q {s.mean_question_words:.2f} "
                f"words, vocab {s.question_vocab} | A {s.mean_answer_words:.2f} "
                f"words, vocab {s.answer_vocab}")
        if self.audio_word_counts:
            top = ", ".join(f"{w}:{c}" for w, c in self.audio_word_counts.items())
            out.append(f"audio words: {top}")
        return out


def _subset_key(row: QAQuadruple) -> str:
    return f"{row.source}/{row.task}"


def compute_stats(
    rows: list[QAQuadruple],
    lexicon: tuple[str, ...] = AUDIO_LEXICON,
    top_k: int = 20,
    key_fn=None,
) -> CorpusStats:
    """Per-subset length and vocabulary statistics plus audio-word counts.

    Subsets default to (source, task) pairs; pass key_fn to regroup. The
    audio-word table holds the top_k most frequent lexicon hits across all
    question and answer text, ties broken alphabetically.
    """
    key_fn = key_fn or _subset_key
    grouped: dict[str, list[QAQuadruple]] = {}
    for row in rows:
        grouped.setdefault(key_fn(row), []).append(row)

    lexicon_set = set(lexicon)
    audio_counter: Counter[str] = Counter()
    subsets = {}
    for name, members in grouped.items():
        q_lens, a_lens = [], []
        q_vocab, a_vocab = set(), set()
        for row in members:
            q_words = words(row.question)
            a_words = words(row.answer)
            q_lens.append(len(q_words))
            a_lens.append(len(a_words))
            q_vocab.update(q_words)
            a_vocab.update(a_words)
            for w in q_words + a_words:
                if w in lexicon_set:
                    audio_counter[w] += 1
        subsets[name] = SubsetStats(
            n_pairs=len(members),
            mean_question_words=sum(q_lens) / len(members),
            question_vocab=len(q_vocab),
            mean_answer_words=sum(a_lens) / len(members),
            answer_vocab=len(a_vocab),
        )

    ranked = sorted(audio_counter.items(), key=lambda kv: (-kv[1], kv[0]))
    return CorpusStats(
        subsets=subsets,
        audio_word_counts=dict(ranked[:top_k]),
        total_pairs=len(rows),
    )
