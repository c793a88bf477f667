"""Score a trained model, then test whether it actually listens.

Trains the toy MCQ task, runs the metric report (accuracy, macro P/R/F1,
BLEU-4 for open-ended rows, parse-failure taxonomy), then replays the
same evaluation with Gaussian noise substituted for every clip. The
accuracy delta is the audio-grounding signal.
"""

import tempfile

from aqalab.audio import MelConfig
from aqalab.encoder import EncoderConfig
from aqalab.evaluation import evaluate_predictions, noise_ablation
from aqalab.lm import LMConfig
from aqalab.mapper import MapperConfig
from aqalab.pipeline import AlmPipeline
from aqalab.sampling import SamplerConfig, generate
from aqalab.toydata import mcq_corpus, toy_tokenizer
from aqalab.trainer import TrainConfig, train

rows = mcq_corpus(tempfile.mkdtemp(), per_class=4, seed=0)
tokenizer = toy_tokenizer(rows, n_merges=128)
pipeline = AlmPipeline.build(
    MelConfig(),
    EncoderConfig(kind="toy_conv", n_classes=8, latent_dim=16, depth=2, width=16),
    MapperConfig(projection_kind="linear", d_model=64),
    LMConfig(n_layers=3, d_model=64, n_heads=4,
             vocab_size=tokenizer.vocab_size, max_seq_len=256),
    tokenizer, seed=0)
train(rows, pipeline, TrainConfig(max_lr=1e-3, epochs=40, batch_size=4,
                                  seed=0, mode="full"))

sampler = SamplerConfig(greedy=True, max_new_tokens=16)
predictions = {}
for i, row in enumerate(rows):
    prefix = pipeline.prefix_for_prompt(row.audio1_id, None, row.question)
    predictions[f"{i:06d}"] = generate(prefix, pipeline.lm,
                                       pipeline.tokenizer, sampler).text

print("metric report:")
for line in evaluate_predictions(rows, predictions).render().splitlines():
    print(f"  {line}")

print("\nnoise probe (same scorer, Gaussian noise instead of audio):")
for line in noise_ablation(pipeline, rows, sampler, seed=0).render().splitlines():
    print(f"  {line}")
