"""Memorize a 64-row toy corpus, then read the answers back out.

Trains the micro stack for 30 epochs with the cosine schedule peaking at
1e-3 and greedy-decodes every training question. A healthy pipeline lands
at or near 100% exact match; anything far below signals wiring trouble.
"""

import tempfile

from aqalab.audio import MelConfig
from aqalab.encoder import EncoderConfig
from aqalab.evaluation import normalize
from aqalab.lm import LMConfig
from aqalab.mapper import MapperConfig
from aqalab.pipeline import AlmPipeline
from aqalab.sampling import SamplerConfig, generate
from aqalab.toydata import overfit_corpus, toy_tokenizer
from aqalab.trainer import TrainConfig, train

rows = overfit_corpus(tempfile.mkdtemp(), seed=0)
tokenizer = toy_tokenizer(rows, n_merges=128)
pipeline = AlmPipeline.build(
    MelConfig(),
    EncoderConfig(kind="toy_conv", n_classes=8, latent_dim=16, depth=2, width=16),
    MapperConfig(projection_kind="linear", d_model=64),
    LMConfig(n_layers=3, d_model=64, n_heads=4,
             vocab_size=tokenizer.vocab_size, max_seq_len=256),
    tokenizer, seed=0)

state = train(rows, pipeline, TrainConfig(max_lr=1e-3, epochs=30,
                                          batch_size=4, seed=0, mode="full"))
print("epoch mean loss, every 5 epochs:")
for epoch in range(0, 30, 5):
    print(f"  epoch {epoch + 1:>2}: {state.epoch_mean_losses[epoch]:.3f}")

sampler = SamplerConfig(greedy=True, max_new_tokens=24)
hits = 0
for row in rows:
    prefix = pipeline.prefix_for_prompt(row.audio1_id, None, row.question)
    text = generate(prefix, pipeline.lm, pipeline.tokenizer, sampler).text
    hits += normalize(text) == normalize(row.answer)
print(f"\ngreedy exact match: {hits}/{len(rows)}")

show = rows[0]
prefix = pipeline.prefix_for_prompt(show.audio1_id, None, show.question)
text = generate(prefix, pipeline.lm, pipeline.tokenizer, sampler).text
print(f"\nQ: {show.question}\ngold: {show.answer}\nmodel: {text}")
