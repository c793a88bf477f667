"""Robust parsing of free-form model output against MCQ options.

Generated answers rarely arrive as a clean option letter. The parser
normalizes, then tries progressively looser matches: option letter, full
option text, unique substring. When everything misses, the failure is
categorized so reports can separate fluent-but-wrong answers from garbage
output. The function is total: any string maps to an index or a category.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass

from ..errors import ConfigError

OPTION_LETTERS = "ABCDE"
FAILURE_CATEGORIES = ("string_noise", "ood_symbols", "knowledge_gap", "other")

_EDGE_CHARS = string.punctuation + string.whitespace + "‘’“”"
_MARKER_RE = re.compile(r"^\(?([A-Ea-e])[).:]\s+")
_LETTER_ONLY_RE = re.compile(r"^([a-e])$")


def normalize(text: str) -> str:
    """Case-fold, trim punctuation and whitespace off the ends, collapse
    inner whitespace runs. Idempotent."""
    out = text.strip(_EDGE_CHARS).casefold()
    return " ".join(out.split())


def strip_option_marker(option: str) -> str:
    """Drop a leading "B) " style marker if the option text carries one."""
    return _MARKER_RE.sub("", option.strip())


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, O(len(a)*len(b))."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1,      # delete
                               current[j - 1] + 1,   # insert
                               previous[j - 1] + cost))  # substitute
        previous = current
    return previous[-1]


@dataclass
class McqParse:
    """Either an option index or a failure category, never both."""

    index: int | None
    failure: str | None = None

    @property
    def matched(self) -> bool:
        return self.index is not None


def _classify_failure(raw: str, normalized: str, texts: list[str],
                      rendered: list[str]) -> str:
    near = min(
        (min(edit_distance(normalized, t), edit_distance(normalized, r))
         for t, r in zip(texts, rendered)),
        default=99,
    )
    if near <= 2:
        return "string_noise"
    visible = [ch for ch in raw if not ch.isspace()]
    if visible and sum(not ch.isalnum() for ch in visible) > len(visible) / 2:
        return "ood_symbols"
    alpha_words = [w for w in normalized.split() if any(ch.isalpha() for ch in w)]
    if len(alpha_words) >= 3:
        # a fluent sentence that matches no option: the model answered from
        # its own world model rather than the provided choices
        return "knowledge_gap"
    return "other"


def parse_mcq_answer(generated: str, options: list[str]) -> McqParse:
    """Map generated text to an option index, or categorize the failure.

    Options may arrive with or without their letter markers; letters are
    assigned by position (A, B, C, ...). Matching order: bare option
    letter, full text (with or without marker), unique substring. The
    result is deterministic and never raises on any generated string.
    """
    if len(options) < 2:
        raise ConfigError(f"need at least 2 options, got {len(options)}")
    if len(options) > len(OPTION_LETTERS):
        raise ConfigError(f"at most {len(OPTION_LETTERS)} options supported")

    texts = [normalize(strip_option_marker(o)) for o in options]
    letters = [OPTION_LETTERS[i].casefold() for i in range(len(options))]
    rendered = [f"{letters[i]}) {texts[i]}" for i in range(len(options))]

    g = normalize(generated)

    letter_match = _LETTER_ONLY_RE.match(g)
    if letter_match:
        idx = letters.index(letter_match.group(1)) \
            if letter_match.group(1) in letters else None
        if idx is not None:
            return McqParse(index=idx)

    for i in range(len(options)):
        if g == texts[i] or g == rendered[i]:
            return McqParse(index=i)

    if len(g) >= 2:
        hits = [i for i in range(len(options))
                if texts[i] and (texts[i] in g or g in texts[i]
                                 or rendered[i] in g or g in rendered[i])]
        if len(hits) == 1:
            return McqParse(index=hits[0])

    return McqParse(index=None,
                    failure=_classify_failure(generated, g, texts, rendered))
