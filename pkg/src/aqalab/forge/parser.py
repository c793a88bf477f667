"""Extract question-answer pairs from raw completion transcripts.

Structure first: alternating "Q:" / "A:" lines. Then per-pair validation:
MCQ pairs need lettered options and an answer that prefix-matches exactly
one of them; all pairs pass grounding filters that drop refusals and
questions answerable from world knowledge alone (no reference to the
actual recording). Rejected pairs carry machine-readable reasons so the
drop statistics stay auditable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

OPTION_LETTERS = "ABCDE"
_OPTION_RE = re.compile(r"(?:(?<=\s)|^)([A-E])\)\s*")

# answers that open with these refuse to commit; generation should retry
REFUSAL_PREFIXES = (
    "unknown",
    "unclear",
    "impossible to determine",
    "cannot be determined",
    "it is impossible",
    "not enough information",
    "i cannot",
)

# questions of the shape "what kind of sound is X" / "what is a X" ask for
# a definition; they only count as grounded if the answer still points back
# at the recording
_DEFINITIONAL_RES = (
    re.compile(r"^\s*what (?:kind|type|sort) of sound is\b", re.IGNORECASE),
    re.compile(r"^\s*what is an? \w+\??\s*$", re.IGNORECASE),
    re.compile(r"^\s*define\b", re.IGNORECASE),
)

AUDIO_DEICTIC_TERMS = (
    "clip", "recording", "audio", "this sound", "the sound", "hear",
    "heard", "in the background", "listener",
)


@dataclass
class RejectedPair:
    question: str
    answer: str
    reason: str


@dataclass
class McqOption:
    letter: str
    text: str

    def render(self) -> str:
        return f"{self.letter}) {self.text}"


def extract_options(question: str) -> list[McqOption]:
    """Lettered options in order of appearance, letters ascending from A."""
    marks = list(_OPTION_RE.finditer(question))
    options = []
    for i, m in enumerate(marks):
        end = marks[i + 1].start() if i + 1 < len(marks) else len(question)
        options.append(McqOption(letter=m.group(1),
                                 text=question[m.end():end].strip()))
    letters = [o.letter for o in options]
    expected = list(OPTION_LETTERS[: len(options)])
    if letters != expected:
        return []
    return options


def _match_answer_to_option(answer: str, options: list[McqOption]) -> McqOption | None:
    """The accepted answer must prefix-match exactly one rendered option."""
    answer = answer.strip()
    hits = [o for o in options
            if o.render().startswith(answer) or answer.startswith(o.render())]
    if len(hits) == 1:
        return hits[0]
    return None


def _is_refusal(answer: str) -> bool:
    lowered = answer.strip().lower()
    return any(lowered.startswith(p) for p in REFUSAL_PREFIXES)


def _is_ungrounded_definition(question: str, answer: str) -> bool:
    if not any(rx.search(question) for rx in _DEFINITIONAL_RES):
        return False
    lowered = answer.lower()
    return not any(term in lowered for term in AUDIO_DEICTIC_TERMS)


def _scan_pairs(raw: str) -> list[tuple[str, str | None]]:
    """Structural pass: (question, answer-or-None) in transcript order."""
    pairs: list[tuple[str, str | None]] = []
    question: str | None = None
    for line in raw.splitlines():
        stripped = line.strip()
        if stripped.startswith("Q:"):
            if question is not None:
                pairs.append((question, None))  # question without an answer
            question = stripped[2:].strip()
        elif stripped.startswith("A:"):
            if question is not None:
                pairs.append((question, stripped[2:].strip()))
                question = None
            # an answer with no open question is ignored noise
    if question is not None:
        pairs.append((question, None))
    return pairs


def parse_qa(raw: str, kind: str, questions_per_call: int = 5,
             ) -> tuple[list[tuple[str, str]], list[RejectedPair]]:
    """Accepted (question, answer) pairs plus per-pair rejection reasons.

    Raises ParseError only when the transcript contains no recognizable
    Q/A structure at all (the caller should re-queue the caption); a
    transcript whose pairs all fail validation returns ([], rejects).
    """
    if kind not in ("detail", "mcq"):
        raise ParseError(f"unknown kind {kind!r}")
    structural = _scan_pairs(raw)
    if not structural:
        raise ParseError("no Q:/A: structure found in transcript")

    accepted: list[tuple[str, str]] = []
    rejected: list[RejectedPair] = []
    for question, answer in structural:
        if answer is None or not answer:
            rejected.append(RejectedPair(question, "", "missing_answer"))
            continue
        if not question:
            rejected.append(RejectedPair("", answer, "missing_question"))
            continue
        if _is_refusal(answer):
            rejected.append(RejectedPair(question, answer, "refusal"))
            continue
        if _is_ungrounded_definition(question, answer):
            rejected.append(RejectedPair(question, answer, "world_knowledge"))
            continue
        if kind == "mcq":
            options = extract_options(question)
            if len(options) < 2:
                rejected.append(RejectedPair(question, answer, "too_few_options"))
                continue
            if _match_answer_to_option(answer, options) is None:
                rejected.append(RejectedPair(question, answer,
                                             "answer_option_mismatch"))
                continue
        if len(accepted) >= questions_per_call:
            rejected.append(RejectedPair(question, answer, "over_quota"))
            continue
        accepted.append((question, answer))
    return accepted, rejected
