"""Byte-level BPE tokenizer trained on the data-forge corpus.

Id layout: 0=pad, 1=bos, 2=eos, 3=sep, 4..259 the raw bytes, 260+ learned
merges. Byte fallback means any string round-trips, trained merges or not.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .errors import VocabError

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
SEP_ID = 3
N_SPECIAL = 4
FIRST_MERGE_ID = N_SPECIAL + 256

SPECIAL_IDS = {"pad": PAD_ID, "bos": BOS_ID, "eos": EOS_ID, "sep": SEP_ID}


def _merge_pass(ids: list[int], pair: tuple[int, int], new_id: int) -> list[int]:
    out = []
    i = 0
    while i < len(ids):
        if i + 1 < len(ids) and ids[i] == pair[0] and ids[i + 1] == pair[1]:
            out.append(new_id)
            i += 2
        else:
            out.append(ids[i])
            i += 1
    return out


@dataclass
class Tokenizer:
    # each entry: (left_id, right_id, merged_id), in training order
    merges: list[tuple[int, int, int]] = field(default_factory=list)

    def __post_init__(self):
        self._ranks = {(a, b): i for i, (a, b, _) in enumerate(self.merges)}
        self._results = {(a, b): m for a, b, m in self.merges}
        self._bytes = {N_SPECIAL + i: bytes([i]) for i in range(256)}
        for a, b, m in self.merges:
            self._bytes[m] = self._bytes[a] + self._bytes[b]

    @property
    def vocab_size(self) -> int:
        return FIRST_MERGE_ID + len(self.merges)

    def encode(self, text: str, add_bos: bool = False, add_eos: bool = False) -> list[int]:
        ids = [N_SPECIAL + b for b in text.encode("utf-8")]
        while len(ids) >= 2:
            pairs = set(zip(ids, ids[1:]))
            ranked = [p for p in pairs if p in self._ranks]
            if not ranked:
                break
            best = min(ranked, key=self._ranks.__getitem__)
            ids = _merge_pass(ids, best, self._results[best])
        if add_bos:
            ids = [BOS_ID] + ids
        if add_eos:
            ids = ids + [EOS_ID]
        return ids

    def decode(self, ids: list[int], skip_special: bool = True) -> str:
        chunks = []
        for i in ids:
            if i < N_SPECIAL:
                if skip_special:
                    continue
                chunks.append(f"<{ {v: k for k, v in SPECIAL_IDS.items()}[i] }>".encode())
                continue
            piece = self._bytes.get(i)
            if piece is None:
                raise VocabError(f"unknown token id {i} (vocab size {self.vocab_size})")
            chunks.append(piece)
        return b"".join(chunks).decode("utf-8", errors="replace")

    def to_dict(self) -> dict:
        return {
            "special_ids": dict(SPECIAL_IDS),
            "n_byte_tokens": 256,
            "merges": [list(m) for m in self.merges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tokenizer":
        if d.get("special_ids") != SPECIAL_IDS:
            raise VocabError(f"incompatible special-id map: {d.get('special_ids')}")
        return cls(merges=[tuple(m) for m in d["merges"]])

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=1)

    @classmethod
    def load(cls, path: str) -> "Tokenizer":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def train_tokenizer(texts: list[str], n_merges: int = 256) -> Tokenizer:
    """Learn a merge table by repeatedly fusing the most frequent adjacent pair.

    Ties break toward the numerically smallest pair so training is
    deterministic for a fixed corpus regardless of iteration order.
    """
    seqs = [[N_SPECIAL + b for b in t.encode("utf-8")] for t in texts]
    merges: list[tuple[int, int, int]] = []
    next_id = FIRST_MERGE_ID
    for _ in range(n_merges):
        counts: Counter = Counter()
        for s in seqs:
            counts.update(zip(s, s[1:]))
        if not counts:
            break
        best = min(counts, key=lambda p: (-counts[p], p))
        if counts[best] < 2:
            break
        merges.append((best[0], best[1], next_id))
        seqs = [_merge_pass(s, best, next_id) for s in seqs]
        next_id += 1
    return Tokenizer(merges=merges)
