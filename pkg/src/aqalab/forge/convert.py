"""Convert existing task records into question-answer quadruples.

Captioning becomes descriptive QA (fixed question pool, caption as answer).
Entailment becomes an MCQ over {entailment, neutral, contradiction} with the
hypothesis embedded in the question. Audio-difference records keep both clip
ids and get a tier-specific question. Binary yes/no QA passes through with
the answer normalized.
"""

from __future__ import annotations

from ..data import QAQuadruple
from ..errors import SchemaError

CAPTION_QUESTIONS = (
    "Describe the audio.",
    "What is happening in this audio clip?",
    "Write a caption for this recording.",
    "Summarize the sounds you hear in the clip.",
)

ENTAILMENT_OPTIONS = ("entailment", "neutral", "contradiction")

_DIFFERENCE_QUESTIONS = {
    1: "Name the sound events in which the two clips differ.",
    2: "How do the sound events in the first clip differ from those in the second?",
    3: "Compare the two clips in detail: how do their sound events, their "
       "qualities, and their likely settings differ?",
}


def _require(record: dict, *fields: str) -> list:
    missing = [f for f in fields if not record.get(f)]
    if missing:
        raise SchemaError(f"record missing fields {missing}: {record}")
    return [record[f] for f in fields]


def caption_to_qa(record: dict, question_index: int = 0) -> QAQuadruple:
    audio_id, caption = _require(record, "audio_id", "caption")
    question = CAPTION_QUESTIONS[question_index % len(CAPTION_QUESTIONS)]
    return QAQuadruple(audio1_id=audio_id, audio2_id="", question=question,
                       answer=caption, task="caption", source="existing")


def entailment_to_mcq(record: dict) -> QAQuadruple:
    audio_id, hypothesis, label = _require(record, "audio_id", "hypothesis", "label")
    if label not in ENTAILMENT_OPTIONS:
        raise SchemaError(f"unknown entailment label {label!r}")
    letters = "ABC"
    options = " ".join(f"{letters[i]}) {opt}"
                       for i, opt in enumerate(ENTAILMENT_OPTIONS))
    question = (f'Consider this statement about the clip: "{hypothesis}" '
                f"Does the audio entail it? {options}")
    idx = ENTAILMENT_OPTIONS.index(label)
    answer = f"{letters[idx]}) {label}"
    return QAQuadruple(audio1_id=audio_id, audio2_id="", question=question,
                       answer=answer, task="entailment_mcq", source="existing")


def difference_to_qa(record: dict) -> QAQuadruple:
    audio1, audio2, explanation = _require(record, "audio1_id", "audio2_id",
                                           "explanation")
    tier = record.get("tier")
    if tier not in (1, 2, 3):
        raise SchemaError(f"difference tier must be 1, 2, or 3, got {tier!r}")
    return QAQuadruple(audio1_id=audio1, audio2_id=audio2,
                       question=_DIFFERENCE_QUESTIONS[tier],
                       answer=explanation, task=f"difference_t{tier}",
                       source="existing")


def binary_to_qa(record: dict) -> QAQuadruple:
    audio_id, question, answer = _require(record, "audio_id", "question", "answer")
    normalized = answer.strip().lower().rstrip(".")
    if normalized not in ("yes", "no"):
        raise SchemaError(f"binary answer must be yes/no, got {answer!r}")
    return QAQuadruple(audio1_id=audio_id, audio2_id="", question=question,
                       answer=normalized, task="binary_aqa", source="existing")


_CONVERTERS = {
    "caption": caption_to_qa,
    "entailment": entailment_to_mcq,
    "difference": difference_to_qa,
    "binary": binary_to_qa,
}


def convert_existing(records: list[dict]) -> list[QAQuadruple]:
    """Dispatch on record['kind']; caption questions rotate deterministically."""
    rows = []
    caption_count = 0
    for record in records:
        kind = record.get("kind")
        if kind not in _CONVERTERS:
            raise SchemaError(f"unknown record kind {kind!r}")
        if kind == "caption":
            rows.append(caption_to_qa(record, caption_count))
            caption_count += 1
        else:
            rows.append(_CONVERTERS[kind](record))
    return rows
