"""Dataset records and manifest files.

Every example is a quadruple: one or two audio references, a question, and
an answer, tagged with its task family and provenance. Manifests are JSONL,
one record per line, with the field names {audio1, audio2, question, answer,
task, source, split}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError

TASK_TAGS = (
    "caption",
    "binary_aqa",
    "entailment_mcq",
    "difference_t1",
    "difference_t2",
    "difference_t3",
    "synth_detail",
    "synth_mcq",
)
DIFFERENCE_TASKS = ("difference_t1", "difference_t2", "difference_t3")
SOURCE_TAGS = ("type1", "type2", "type3", "existing")
SPLIT_NAMES = ("train", "val", "test")


@dataclass
class QAQuadruple:
    audio1_id: str
    audio2_id: str  # empty unless the task compares two clips
    question: str
    answer: str
    task: str
    source: str

    def validate(self) -> None:
        if not self.audio1_id:
            raise SchemaError("audio1_id is required")
        if self.task not in TASK_TAGS:
            raise SchemaError(f"unknown task {self.task!r}")
        if self.source not in SOURCE_TAGS:
            raise SchemaError(f"unknown source {self.source!r}")
        needs_pair = self.task in DIFFERENCE_TASKS
        if needs_pair and not self.audio2_id:
            raise SchemaError(f"{self.task} requires audio2_id")
        if not needs_pair and self.audio2_id:
            raise SchemaError(f"{self.task} must leave audio2_id empty")
        if not self.question or not self.answer:
            raise SchemaError("question and answer must be non-empty")

    def to_record(self, split: str = "") -> dict:
        return {
            "audio1": self.audio1_id,
            "audio2": self.audio2_id,
            "question": self.question,
            "answer": self.answer,
            "task": self.task,
            "source": self.source,
            "split": split,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "QAQuadruple":
        try:
            quad = cls(
                audio1_id=rec["audio1"],
                audio2_id=rec.get("audio2", ""),
                question=rec["question"],
                answer=rec["answer"],
                task=rec["task"],
                source=rec["source"],
            )
        except KeyError as exc:
            raise SchemaError(f"manifest record missing field {exc}") from exc
        quad.validate()
        return quad


@dataclass
class DatasetManifest:
    split: str
    rows: list[QAQuadruple] = field(default_factory=list)
    composition: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        if self.split not in SPLIT_NAMES:
            raise SchemaError(f"unknown split {self.split!r}")
        for row in self.rows:
            row.validate()
        if self.composition:
            total = sum(self.composition.values())
            if abs(total - 100.0) > 0.3:
                raise SchemaError(f"composition sums to {total:.3f}, not 100")

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for row in self.rows:
                f.write(json.dumps(row.to_record(self.split)) + "\n")

    @classmethod
    def load(cls, path: str, split: str | None = None) -> "DatasetManifest":
        rows = []
        seen_split = split
        for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{i + 1}: not valid JSON: {exc}") from exc
            rows.append(QAQuadruple.from_record(rec))
            if seen_split is None and rec.get("split"):
                seen_split = rec["split"]
        manifest = cls(split=seen_split or "train", rows=rows)
        manifest.validate()
        return manifest
