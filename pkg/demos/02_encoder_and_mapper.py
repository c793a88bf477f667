"""From mel frames to LM-ready audio tokens.

Runs both trainable encoders on the same clip and pushes their outputs
through each projection variant, printing the token-count arithmetic:
K = ceil(T'/8) + 1 for the pooled paths, a fixed constant count for the
attention-pooled one.
"""

import numpy as np
import torch

from aqalab.audio import AudioClip, CANONICAL_RATE_HZ, log_mel, normalize_clip
from aqalab.encoder import EncoderConfig, build_encoder
from aqalab.mapper import Mapper, MapperConfig, expected_token_count
from aqalab.toydata import synth_wave

clip = normalize_clip(AudioClip(samples=synth_wave(1, variant=0),
                                sample_rate_hz=CANONICAL_RATE_HZ, source_id="demo"))
mel = torch.as_tensor(log_mel(clip).frames, dtype=torch.float32)
print(f"mel frames: {tuple(mel.shape)}\n")

for kind in ("toy_conv", "toy_transformer"):
    encoder = build_encoder(EncoderConfig(kind=kind, n_classes=8,
                                          latent_dim=16, depth=2, width=32))
    with torch.no_grad():
        framewise, latent = encoder(mel)
    print(f"{kind}: framewise {tuple(framewise.shape)}, "
          f"latent {tuple(latent.shape)}")
    for projection in ("linear", "nonlinear", "transformer_const"):
        config = MapperConfig(projection_kind=projection, d_model=64)
        mapper = Mapper(config, latent_dim=16, n_classes=8)
        with torch.no_grad():
            emb = mapper(framewise, latent)
        want = expected_token_count(framewise.shape[0], config)
        print(f"  {projection:>17}: {emb.tokens.shape[0]} tokens "
              f"(expected {want}), width {emb.tokens.shape[1]}")
    print()
