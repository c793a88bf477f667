"""Captions to training rows, offline.

Renders a prompt, asks the mock LLM for transcripts, parses them with the
structural QA scanner, composes leakage-free splits, and prints corpus
statistics, the same path `aqalab forge`/`compose`/`stats` drive from the
shell.
"""

import tempfile
from pathlib import Path

from aqalab.cli import mock_transcript
from aqalab.forge import (
    ClientConfig,
    MockLLMClient,
    compose_splits,
    compute_stats,
    get_template,
    parse_qa,
    render_prompt,
    run_generation,
)
from aqalab.data import QAQuadruple

captions = [
    ("clip_001", "a dog barks twice near a road"),
    ("clip_002", "rain patters on a tin roof"),
    ("clip_003", "a kettle whistles in a kitchen"),
    ("clip_004", "waves crash against rocks"),
]

template = get_template("type1", "mcq")
system, user = render_prompt(template, captions[0][1])
print("rendered user prompt, first 3 lines:")
for line in user.splitlines()[:3]:
    print(f"  {line}")

client = MockLLMClient({text: mock_transcript(text, "mcq")
                        for _, text in captions})
log_path = str(Path(tempfile.mkdtemp()) / "log.jsonl")
outcomes = run_generation(captions, template, client, ClientConfig(), log_path)

rows: list[QAQuadruple] = []
for cid, _ in captions:
    accepted, rejected = parse_qa(outcomes[cid].transcript, "mcq", 5)
    print(f"{cid}: {len(accepted)} accepted, {len(rejected)} rejected")
    rows += [QAQuadruple(audio1_id=cid, audio2_id="", question=q, answer=a,
                         task="synth_mcq", source="type1")
             for q, a in accepted]

splits = compose_splits(rows, {"train": 0.5, "val": 0.25, "test": 0.25}, seed=0)
print("\nsplit sizes:", {s: len(m.rows) for s, m in splits.items()})
overlap = set(r.audio1_id for r in splits["train"].rows) & \
    set(r.audio1_id for r in splits["test"].rows)
print(f"train/test clip overlap: {len(overlap)} (must be 0)")

print("\ncorpus statistics:")
for line in compute_stats(rows, top_k=5).lines():
    print(f"  {line}")
