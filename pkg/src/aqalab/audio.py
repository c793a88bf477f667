"""Audio loading, normalization, and log-mel featurization.

Every clip entering the model is mono, 32 kHz, and exactly 10 s long
(truncated or zero-padded). Featurization is deliberately plain: Hann
window STFT, triangular HTK-mel filterbank, natural-log compression with
a fixed floor. Quality beyond that is irrelevant at this scale; what
matters is that the frontend is deterministic and config-pinned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io.wavfile

from .errors import ConfigError, DecodeError, EmptyAudio

CANONICAL_RATE_HZ = 32_000
CLIP_SECONDS = 10.0


@dataclass
class AudioClip:
    """Mono PCM samples pinned to the canonical rate and duration."""

    samples: np.ndarray  # float64, shape (n,)
    sample_rate_hz: int
    source_id: str

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass
class MelConfig:
    sample_rate_hz: int = CANONICAL_RATE_HZ
    n_mels: int = 64
    hop_s: float = 0.010
    win_s: float = 0.032
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # defaults to Nyquist
    power_floor: float = 1e-10    # log floor; silence maps to log(power_floor)

    def validate(self) -> None:
        if self.n_mels < 1:
            raise ConfigError(f"n_mels must be >= 1, got {self.n_mels}")
        if self.hop_s <= 0:
            raise ConfigError(f"hop_s must be > 0, got {self.hop_s}")
        if self.win_s < self.hop_s:
            raise ConfigError("win_s must be >= hop_s")


@dataclass
class LogMelSpec:
    frames: np.ndarray  # (T, n_mels) float64
    hop_s: float
    mel_bins: int
    source_id: str = ""


def _to_float(samples: np.ndarray) -> np.ndarray:
    if samples.dtype == np.int16:
        return samples.astype(np.float64) / 32768.0
    if samples.dtype == np.int32:
        return samples.astype(np.float64) / 2147483648.0
    if samples.dtype == np.uint8:
        return (samples.astype(np.float64) - 128.0) / 128.0
    return samples.astype(np.float64)


def normalize_clip(clip: AudioClip, target_rate: int = CANONICAL_RATE_HZ) -> AudioClip:
    """Resample (linear interpolation), then truncate or zero-pad to 10 s.

    Idempotent: applying twice gives the same clip as applying once.
    """
    samples = np.asarray(clip.samples, dtype=np.float64)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if not np.all(np.isfinite(samples)):
        raise DecodeError(f"{clip.source_id}: non-finite samples")
    if clip.sample_rate_hz != target_rate:
        n_out = int(round(len(samples) * target_rate / clip.sample_rate_hz))
        old_t = np.arange(len(samples)) / clip.sample_rate_hz
        new_t = np.arange(n_out) / target_rate
        samples = np.interp(new_t, old_t, samples)
    n_target = int(round(CLIP_SECONDS * target_rate))
    if len(samples) >= n_target:
        samples = samples[:n_target]
    else:
        samples = np.concatenate([samples, np.zeros(n_target - len(samples))])
    return AudioClip(samples=samples, sample_rate_hz=target_rate, source_id=clip.source_id)


def load_clip(path: str, target_rate: int = CANONICAL_RATE_HZ) -> AudioClip:
    """Load a WAV file (PCM16/float32) as a normalized mono clip."""
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    if data.size == 0:
        raise EmptyAudio(f"{path}: zero samples")
    samples = _to_float(np.asarray(data))
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    clip = AudioClip(samples=samples, sample_rate_hz=int(rate), source_id=str(path))
    return normalize_clip(clip, target_rate)


def gaussian_noise_clip(seed: int, source_id: str = "") -> AudioClip:
    """10 s of zero-mean unit-variance noise, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    n = int(round(CLIP_SECONDS * CANONICAL_RATE_HZ))
    samples = rng.standard_normal(n)
    return AudioClip(
        samples=samples,
        sample_rate_hz=CANONICAL_RATE_HZ,
        source_id=source_id or f"gaussian-noise-{seed}",
    )


def hz_to_mel(f: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate_hz: int,
                   fmin_hz: float, fmax_hz: float) -> np.ndarray:
    """Triangular HTK-mel filters, shape (n_mels, n_fft//2 + 1)."""
    mel_points = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate_hz)
    fb = np.zeros((n_mels, len(bin_freqs)))
    for k in range(n_mels):
        left, center, right = hz_points[k], hz_points[k + 1], hz_points[k + 2]
        up = (bin_freqs - left) / max(center - left, 1e-12)
        down = (right - bin_freqs) / max(right - center, 1e-12)
        fb[k] = np.clip(np.minimum(up, down), 0.0, None)
    return fb


def log_mel(clip: AudioClip, config: MelConfig | None = None) -> LogMelSpec:
    """Log-mel spectrogram of a normalized clip.

    The signal is center-padded with zeros by half a window, so a 10 s
    clip at a 10 ms hop yields T = 1001 frames. Silence maps to the log
    floor everywhere, and scaling the input never decreases any cell.
    """
    config = config or MelConfig()
    config.validate()
    sr = config.sample_rate_hz
    hop = int(round(config.hop_s * sr))
    win = int(round(config.win_s * sr))
    n_fft = win
    fmax = config.fmax_hz if config.fmax_hz is not None else sr / 2.0

    samples = np.asarray(clip.samples, dtype=np.float64)
    pad = n_fft // 2
    padded = np.concatenate([np.zeros(pad), samples, np.zeros(pad)])
    n_frames = 1 + (len(padded) - n_fft) // hop
    window = np.hanning(win)

    idx = np.arange(n_fft)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = padded[idx] * window[None, :]
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2  # (T, n_fft//2+1)

    fb = mel_filterbank(config.n_mels, n_fft, sr, config.fmin_hz, fmax)
    mel_power = power @ fb.T
    log_frames = np.log(np.maximum(mel_power, config.power_floor))
    return LogMelSpec(
        frames=log_frames,
        hop_s=config.hop_s,
        mel_bins=config.n_mels,
        source_id=clip.source_id,
    )
