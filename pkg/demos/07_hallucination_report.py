"""Bundle the evidence behind one generation.

Writes the single-file JSON report a reviewer would open when a model
claims to hear something: the log-mel image, the encoder's per-frame
event probabilities with the top-3 traces flagged, and the generated
text. A silent clip should keep every presence trace low.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from aqalab.audio import AudioClip, CANONICAL_RATE_HZ
from aqalab.encoder import EncoderConfig, build_encoder
from aqalab.evaluation import HallucinationReport, hallucination_report
from aqalab.toydata import synth_wave

encoder = build_encoder(EncoderConfig(kind="toy_conv", n_classes=6,
                                      latent_dim=16, depth=2, width=16))

clip = AudioClip(samples=synth_wave(0, variant=0),
                 sample_rate_hz=CANONICAL_RATE_HZ, source_id="hum_demo")
report = hallucination_report(clip, "a low steady hum", encoder)

out = Path(tempfile.mkdtemp()) / "hallucination.json"
report.save(str(out))
loaded = HallucinationReport.load(str(out))
names = loaded.timeline.class_names

print(f"report: {out}")
print(f"mel image: {np.asarray(loaded.mel).shape}")
print(f"timeline: {np.asarray(loaded.timeline.probs).shape} "
      f"(frames x classes), {len(loaded.timeline.times)} timestamps")
print(f"generated text: {loaded.generated_text!r}")
print("top-3 traces by mean presence:")
probs = np.asarray(loaded.timeline.probs)
for idx in loaded.timeline.top_k:
    print(f"  {names[idx]}: mean {probs[:, idx].mean():.3f}")

size_kb = out.stat().st_size / 1024
roundtrip = json.loads(out.read_text()) == report.to_dict()
print(f"\nfile size {size_kb:.0f} KiB, lossless round trip: {roundtrip}")
