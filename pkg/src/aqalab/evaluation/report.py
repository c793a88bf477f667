"""Scoring manifests against prediction files into one metric report.

Rows whose question embeds two or more lettered options are scored as
close-ended MCQ (with the robust answer parser; unparseable generations
count as wrong and feed the failure histogram). All other rows are scored
as open-ended text with BLEU-4 and normalized exact match. The rendered
report is deterministic text so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..data import QAQuadruple
from ..errors import DataError, SchemaError
from ..forge.parser import extract_options
from .mcq import FAILURE_CATEGORIES, normalize, parse_mcq_answer
from .metrics import bleu4, classification_metrics

UNPARSED_LABEL = "<unparsed>"


def row_id(index: int) -> str:
    return f"{index:06d}"


@dataclass
class MetricReport:
    n_examples: int = 0
    n_closed: int = 0
    n_open: int = 0
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    per_class_acc: dict[str, float] = field(default_factory=dict)
    bleu4: float = 0.0
    exact_match: float = 0.0
    parse_failures: dict[str, int] = field(default_factory=dict)

    def validate(self) -> None:
        for name in ("accuracy", "precision", "recall", "f1", "bleu4",
                     "exact_match"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DataError(f"{name}={value} outside [0, 1]")
        for label, acc in self.per_class_acc.items():
            if not 0.0 <= acc <= 1.0:
                raise DataError(f"per_class_acc[{label!r}]={acc} outside [0, 1]")
        if sum(self.parse_failures.values()) > self.n_examples:
            raise DataError("more parse failures than examples")

    def render(self) -> str:
        lines = [
            f"examples: {self.n_examples}",
            f"closed_ended: {self.n_closed}",
            f"open_ended: {self.n_open}",
            f"accuracy: {self.accuracy:.6f}",
            f"precision: {self.precision:.6f}",
            f"recall: {self.recall:.6f}",
            f"f1: {self.f1:.6f}",
        ]
        for label in sorted(self.per_class_acc):
            lines.append(f"class_acc[{label}]: {self.per_class_acc[label]:.6f}")
        lines.append(f"bleu4: {self.bleu4:.6f}")
        lines.append(f"exact_match: {self.exact_match:.6f}")
        for category in FAILURE_CATEGORIES:
            lines.append(
                f"parse_failures[{category}]: {self.parse_failures.get(category, 0)}")
        return "\n".join(lines) + "\n"

    def save(self, path: str) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")


def save_predictions(path: str, rows: list[QAQuadruple],
                     generated: list[str]) -> None:
    """Write a predictions file: one JSONL record {id, generated_text} per
    manifest row, ids assigned by row position."""
    if len(rows) != len(generated):
        raise DataError(f"{len(rows)} rows vs {len(generated)} generations")
    with open(path, "w", encoding="utf-8") as f:
        for i, text in enumerate(generated):
            f.write(json.dumps({"id": row_id(i), "generated_text": text}) + "\n")


def load_predictions(path: str) -> dict[str, str]:
    predictions: dict[str, str] = {}
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            predictions[rec["id"]] = rec["generated_text"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise SchemaError(f"{path}:{i + 1}: bad prediction record: {exc}") from exc
    return predictions


def evaluate_predictions(rows: list[QAQuadruple],
                         predictions: dict[str, str]) -> MetricReport:
    """Score predictions (keyed by positional row id) against manifest rows."""
    if not rows:
        raise DataError("no rows to evaluate")

    closed_gold: list[str] = []
    closed_pred: list[str] = []
    open_candidates: list[str] = []
    open_references: list[str] = []
    failures = {category: 0 for category in FAILURE_CATEGORIES}
    exact = 0

    for i, row in enumerate(rows):
        rid = row_id(i)
        if rid not in predictions:
            raise DataError(f"prediction missing for row {rid}")
        generated = predictions[rid]
        if normalize(generated) == normalize(row.answer):
            exact += 1
        options = extract_options(row.question)
        if len(options) >= 2:
            option_texts = [o.text for o in options]
            gold_parse = parse_mcq_answer(row.answer, option_texts)
            if not gold_parse.matched:
                raise DataError(
                    f"gold answer {row.answer!r} matches no option in row {rid}")
            gen_parse = parse_mcq_answer(generated, option_texts)
            closed_gold.append(normalize(option_texts[gold_parse.index]))
            if gen_parse.matched:
                closed_pred.append(normalize(option_texts[gen_parse.index]))
            else:
                closed_pred.append(UNPARSED_LABEL)
                failures[gen_parse.failure] += 1
        else:
            open_references.append(row.answer)
            open_candidates.append(generated)

    report = MetricReport(
        n_examples=len(rows),
        n_closed=len(closed_gold),
        n_open=len(open_candidates),
        exact_match=exact / len(rows),
        parse_failures=failures,
    )
    if closed_gold:
        cls = classification_metrics(closed_gold, closed_pred,
                                     classes=sorted(set(closed_gold)))
        report.accuracy = cls.accuracy
        report.precision = cls.precision
        report.recall = cls.recall
        report.f1 = cls.f1
        report.per_class_acc = cls.per_class_acc
    if open_candidates:
        report.bleu4 = bleu4(open_candidates, open_references)
    report.validate()
    return report
