"""Waveform in, log-mel frames out.

Synthesizes one toy clip per class, runs the mel frontend, and shows the
shape contract the encoders rely on: 10 s at 32 kHz -> 1001 frames x 64
mel bins, with a pure 1 kHz tone lighting up the expected filter.
"""

import numpy as np

from aqalab.audio import AudioClip, CANONICAL_RATE_HZ, MelConfig, log_mel, normalize_clip
from aqalab.toydata import TOY_CLASSES, synth_wave

config = MelConfig()
for class_idx, name in enumerate(TOY_CLASSES):
    wave = synth_wave(class_idx, variant=0)
    clip = normalize_clip(AudioClip(samples=wave, sample_rate_hz=CANONICAL_RATE_HZ,
                                    source_id=name))
    spec = log_mel(clip, config)
    peak_bin = int(np.argmax(spec.frames.mean(axis=0)))
    print(f"{name:>13}: frames {spec.frames.shape}, "
          f"hottest mel bin {peak_bin}")

tone = np.sin(2 * np.pi * 1000.0 * np.arange(320_000) / CANONICAL_RATE_HZ)
clip = normalize_clip(AudioClip(samples=tone.astype(np.float32),
                                sample_rate_hz=CANONICAL_RATE_HZ, source_id="1khz"))
spec = log_mel(clip, config)
print(f"\n1 kHz tone peaks at mel bin "
      f"{int(np.argmax(spec.frames.mean(axis=0)))} (expected 17)")
