"""Prompt templates for synthetic question generation.

Three data types share one mechanical contract: the user message carries a
`{caption}` placeholder (exactly once) and a format footer demanding
alternating "Q:"/"A:" lines, which is what the parser consumes. Type 1
prompts work from the caption alone; types 2 and 3 share identical prompt
text (they differ only in which LLM answers) and push for event coverage
plus inferred context.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import TemplateError

DATA_TYPES = ("type1", "type2", "type3")
KINDS = ("detail", "mcq")
QUESTIONS_PER_CALL = 5

PLACEHOLDER = "{caption}"

FORMAT_FOOTER = (
    "Return exactly 5 question-answer pairs and nothing else.\n"
    "Write each pair as exactly two lines:\n"
    "Q: <the question>\n"
    "A: <the answer>"
)

_T1_SYSTEM = (
    "You write question-answer pairs about a sound recording, working only "
    "from its caption. Every question must ask about what a listener can "
    "hear in the clip, and every answer must be fully supported by the "
    "caption. Do not mention the caption itself and do not invent facts "
    "it cannot support."
)

_T1_DETAIL_USER = (
    "Caption: {caption}\n\n"
    "Write 5 diverse question-answer pairs about this recording. Cover the "
    "sound events present, their acoustic character, what the sound is most "
    "similar to, what it might indicate, and what a listener could do on "
    "hearing it. Answer in complete sentences.\n\n" + FORMAT_FOOTER
)

_T1_MCQ_USER = (
    "Caption: {caption}\n\n"
    "Write 5 multiple-choice question-answer pairs about this recording. "
    "Each question lists four options labelled A) B) C) D) on the same "
    "line, with exactly one option supported by the caption. The answer "
    "line repeats the correct option letter and its text.\n\n" + FORMAT_FOOTER
)

# types 2 and 3 share prompt text; only the generating model differs
_T23_SYSTEM = (
    "You write question-answer pairs about a sound recording, working only "
    "from its caption. Cover every event and sound the caption describes, "
    "not just the most prominent one. When the surroundings or situation "
    "can be inferred from those sounds, weave that setting into the "
    "questions and answers. Stay grounded: never rely on facts the caption "
    "cannot support, and never mention the caption itself."
)

_T23_DETAIL_USER = (
    "Caption: {caption}\n\n"
    "Write 5 question-answer pairs about this recording. Between them the "
    "pairs should touch every sound event mentioned, how the sounds relate "
    "to each other, and what the overall scene or setting is likely to be. "
    "Answer in complete sentences.\n\n" + FORMAT_FOOTER
)

_T23_MCQ_USER = (
    "Caption: {caption}\n\n"
    "Write 5 multiple-choice question-answer pairs about this recording. "
    "Between them the questions should cover every sound event mentioned "
    "and the scene they suggest. Each question lists four options labelled "
    "A) B) C) D) on the same line, with exactly one option supported by "
    "the caption. The answer line repeats the correct option letter and "
    "its text.\n\n" + FORMAT_FOOTER
)


@dataclass(frozen=True)
class PromptTemplate:
    data_type: str
    kind: str
    system_text: str
    user_text: str
    questions_per_call: int = QUESTIONS_PER_CALL

    def validate(self) -> None:
        if self.data_type not in DATA_TYPES:
            raise TemplateError(f"unknown data_type {self.data_type!r}")
        if self.kind not in KINDS:
            raise TemplateError(f"unknown kind {self.kind!r}")
        n = self.user_text.count(PLACEHOLDER)
        if n != 1:
            raise TemplateError(
                f"user_text must contain {PLACEHOLDER} exactly once, found {n}")


_REGISTRY: dict[tuple[str, str], PromptTemplate] = {}
for _dt in DATA_TYPES:
    _system = _T1_SYSTEM if _dt == "type1" else _T23_SYSTEM
    if _dt == "type1":
        _detail, _mcq = _T1_DETAIL_USER, _T1_MCQ_USER
    else:
        _detail, _mcq = _T23_DETAIL_USER, _T23_MCQ_USER
    _REGISTRY[(_dt, "detail")] = PromptTemplate(_dt, "detail", _system, _detail)
    _REGISTRY[(_dt, "mcq")] = PromptTemplate(_dt, "mcq", _system, _mcq)


def get_template(data_type: str, kind: str) -> PromptTemplate:
    try:
        return _REGISTRY[(data_type, kind)]
    except KeyError:
        raise TemplateError(f"no template for ({data_type!r}, {kind!r})") from None


def render_prompt(template: PromptTemplate, caption: str) -> tuple[str, str]:
    """Substitute the caption into the user text, byte-exactly, no re-expansion.

    Plain string replacement (not str.format): a caption containing braces
    lands in the prompt verbatim.
    """
    template.validate()
    if not caption:
        raise TemplateError("caption must be non-empty")
    user = template.user_text.replace(PLACEHOLDER, caption)
    return template.system_text, user
