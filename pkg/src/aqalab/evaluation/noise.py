"""Noise-reliance probe: does the model actually listen?

The same close-ended eval set is scored twice through one code path, first
with the real audio and then with seeded Gaussian noise substituted for
every clip. A model that grounds its answers in the audio collapses toward
chance on the noise pass; an audio-ignoring model scores the same on both.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..audio import AudioClip, gaussian_noise_clip
from ..data import QAQuadruple
from ..errors import DataError
from ..forge.parser import extract_options
from ..sampling import SamplerConfig, generate
from .mcq import FAILURE_CATEGORIES, parse_mcq_answer


@dataclass
class NoiseProbeResult:
    acc_real: float
    acc_noise: float
    delta: float  # acc_real - acc_noise
    n_examples: int
    chance: float  # 1 / mean option count
    failures_real: dict[str, int]
    failures_noise: dict[str, int]

    def render(self) -> str:
        lines = [
            f"examples: {self.n_examples}",
            f"acc_real: {self.acc_real:.6f}",
            f"acc_noise: {self.acc_noise:.6f}",
            f"delta: {self.delta:.6f}",
            f"chance: {self.chance:.6f}",
        ]
        for category in FAILURE_CATEGORIES:
            lines.append(f"failures_real[{category}]: "
                         f"{self.failures_real.get(category, 0)}")
        for category in FAILURE_CATEGORIES:
            lines.append(f"failures_noise[{category}]: "
                         f"{self.failures_noise.get(category, 0)}")
        return "\n".join(lines) + "\n"


def _score_pass(pipeline, rows: list[QAQuadruple], sampler: SamplerConfig,
                clip_for) -> tuple[float, dict[str, int]]:
    correct = 0
    failures = {category: 0 for category in FAILURE_CATEGORIES}
    for row in rows:
        options = [o.text for o in extract_options(row.question)]
        gold = parse_mcq_answer(row.answer, options)
        audio1 = clip_for(row.audio1_id)
        audio2 = clip_for(row.audio2_id) if row.audio2_id else None
        prefix = pipeline.prefix_for_prompt(audio1, audio2, row.question)
        result = generate(prefix, pipeline.lm, pipeline.tokenizer, sampler)
        parsed = parse_mcq_answer(result.text, options)
        if parsed.matched:
            if parsed.index == gold.index:
                correct += 1
        else:
            failures[parsed.failure] += 1
    return correct / len(rows), failures


def noise_ablation(pipeline, rows: list[QAQuadruple],
                   sampler: SamplerConfig | None = None,
                   seed: int = 0) -> NoiseProbeResult:
    """Accuracy on real audio vs seeded Gaussian noise, one scorer for both.

    Every distinct audio reference gets its own deterministic noise clip
    (seed + rank in sorted order), so reruns with the same seed are
    identical. Rows must be close-ended: each question needs >= 2 lettered
    options, and each gold answer must resolve to one of them.
    """
    if not rows:
        raise DataError("no rows to probe")
    option_counts = []
    for row in rows:
        options = [o.text for o in extract_options(row.question)]
        if len(options) < 2:
            raise DataError(
                f"noise probe needs close-ended rows; question has "
                f"{len(options)} options: {row.question!r}")
        if not parse_mcq_answer(row.answer, options).matched:
            raise DataError(f"gold answer {row.answer!r} matches no option")
        option_counts.append(len(options))

    sampler = sampler or SamplerConfig(greedy=True)

    distinct_ids = sorted({row.audio1_id for row in rows}
                          | {row.audio2_id for row in rows if row.audio2_id})
    noise_clips: dict[str, AudioClip] = {
        audio_id: gaussian_noise_clip(seed + rank)
        for rank, audio_id in enumerate(distinct_ids)
    }

    acc_real, failures_real = _score_pass(pipeline, rows, sampler,
                                          clip_for=lambda ref: ref)
    acc_noise, failures_noise = _score_pass(pipeline, rows, sampler,
                                            clip_for=noise_clips.__getitem__)
    return NoiseProbeResult(
        acc_real=acc_real,
        acc_noise=acc_noise,
        delta=acc_real - acc_noise,
        n_examples=len(rows),
        chance=sum(1.0 / c for c in option_counts) / len(option_counts),
        failures_real=failures_real,
        failures_noise=failures_noise,
    )
