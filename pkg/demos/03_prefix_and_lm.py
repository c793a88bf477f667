"""Two clips plus a question, assembled into one decoder sequence.

Shows the prefix layout [audio1][sep][audio2][sep][question] row by row,
then the causal LM's logits over prefix + answer positions, and where the
answer's first scored row sits (index k-1).
"""

from collections import Counter

import tempfile

from aqalab.audio import MelConfig
from aqalab.encoder import EncoderConfig
from aqalab.lm import LMConfig
from aqalab.mapper import MapperConfig
from aqalab.pipeline import AlmPipeline
from aqalab.tokenizer import train_tokenizer
from aqalab.toydata import write_toy_audio

clips = write_toy_audio(tempfile.mkdtemp(), per_class=1, seed=0)
question = "How do these two clips differ?"
tokenizer = train_tokenizer([question, "the first hums, the second whistles"])

pipeline = AlmPipeline.build(
    MelConfig(),
    EncoderConfig(kind="toy_conv", n_classes=8, latent_dim=16, depth=2, width=16),
    MapperConfig(projection_kind="linear", d_model=32),
    LMConfig(n_layers=2, d_model=32, n_heads=2,
             vocab_size=tokenizer.vocab_size, max_seq_len=512),
    tokenizer, seed=0)

prefix = pipeline.prefix_for_prompt(clips[0].path, clips[1].path, question)
segments = Counter(prefix.segment_map)
print(f"prefix rows: {prefix.k}")
for tag in ("audio1", "sep", "audio2", "text"):
    print(f"  {tag:>6}: {segments[tag]}")

answer_ids = tokenizer.encode("the first one hums", add_eos=True)
logits = pipeline.lm(prefix.tokens, answer_ids)
print(f"\nlogits over prefix+answer: {tuple(logits.shape)}")
print(f"answer token 0 is scored from logits row {prefix.k - 1}")

one_audio = pipeline.prefix_for_prompt(clips[0].path, None, question)
print(f"\none-audio prefix rows: {one_audio.k} "
      f"(separators: {Counter(one_audio.segment_map)['sep']})")
