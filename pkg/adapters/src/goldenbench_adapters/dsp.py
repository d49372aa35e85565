"""Classical signal processing behind the offline backends.

The offline backends exist so the full adapter pipeline can run, and be
tested, without any neural checkpoint: log-mel filterbank frames stand in
for learned frame features, pooled filterbank statistics for a speaker
embedding, an autocorrelation pitch estimate drives the tone synthesizer,
and a crude signal-quality heuristic stands in for a learned MOS
predictor.  They are deterministic and honest about what they are; none
of them claims to approximate the corresponding neural model's values.
"""

from __future__ import annotations

import hashlib

import numpy as np

N_MELS = 24
FRAME_SECONDS = 0.025
HOP_SECONDS = 0.010


def _frame_signal(samples: np.ndarray, rate: int) -> np.ndarray:
    frame = int(rate * FRAME_SECONDS)
    hop = int(rate * HOP_SECONDS)
    if samples.shape[0] < frame:
        samples = np.pad(samples, (0, frame - samples.shape[0]))
    n_frames = 1 + (samples.shape[0] - frame) // hop
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    return samples[idx] * np.hanning(frame)[None, :]


def _mel(hz: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_inv(mel: np.ndarray) -> np.ndarray:
    return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)


def _mel_weights(rate: int, n_fft: int, n_mels: int) -> np.ndarray:
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / rate)
    edges = _mel_inv(np.linspace(_mel(20.0), _mel(rate / 2.0), n_mels + 2))
    weights = np.zeros((n_mels, freqs.shape[0]))
    for m in range(n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs - lo) / (mid - lo)
        down = (hi - freqs) / (hi - mid)
        weights[m] = np.clip(np.minimum(up, down), 0.0, None)
    return weights


def log_mel_frames(samples: np.ndarray, rate: int, n_mels: int = N_MELS) -> np.ndarray:
    """(frames, n_mels) float32 log filterbank energies."""
    frames = _frame_signal(samples, rate)
    n_fft = frames.shape[1]
    powers = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    mels = powers @ _mel_weights(rate, n_fft, n_mels).T
    return np.log(mels + 1e-10).astype(np.float32)


def speaker_vector(samples: np.ndarray, rate: int) -> np.ndarray:
    """(1, 2 * n_mels) L2-normalized mean+std pooling of filterbank frames."""
    frames = log_mel_frames(samples, rate)
    pooled = np.concatenate([frames.mean(axis=0), frames.std(axis=0)])
    norm = np.linalg.norm(pooled)
    if norm > 0:
        pooled = pooled / norm
    return pooled.astype(np.float32).reshape(1, -1)


def estimate_f0(samples: np.ndarray, rate: int, lo: float = 60.0, hi: float = 400.0) -> float:
    """Autocorrelation pitch estimate in Hz, clamped to [lo, hi]."""
    if samples.shape[0] < int(rate / lo) * 2:
        return 150.0
    x = samples - samples.mean()
    ac = np.correlate(x, x, mode="full")[x.shape[0] - 1 :]
    lag_lo = int(rate / hi)
    lag_hi = min(int(rate / lo), ac.shape[0] - 1)
    if lag_hi <= lag_lo:
        return 150.0
    lag = lag_lo + int(np.argmax(ac[lag_lo:lag_hi]))
    return float(np.clip(rate / lag, lo, hi))


def quality_heuristic(samples: np.ndarray, rate: int) -> float:
    """Signal-quality score in [1, 5] from clipping, level, and flatness.

    A placeholder for a learned naturalness predictor: it penalizes
    clipping, near-silence, and noise-like flat spectra.
    """
    if samples.shape[0] == 0:
        return 1.0
    clip_frac = float(np.mean(np.abs(samples) > 0.985))
    rms = float(np.sqrt(np.mean(samples**2)))
    level = float(np.clip(rms / 0.08, 0.0, 1.0))
    frames = _frame_signal(samples, rate)
    powers = np.abs(np.fft.rfft(frames, axis=1)) ** 2 + 1e-12
    flatness = float(
        np.mean(np.exp(np.mean(np.log(powers), axis=1)) / np.mean(powers, axis=1))
    )
    tonality = 1.0 - np.clip(flatness * 4.0, 0.0, 1.0)
    score = 1.0 + 4.0 * (0.5 * level + 0.5 * tonality) * (1.0 - clip_frac)
    return float(np.clip(score, 1.0, 5.0))


def _word_seed(word: str) -> int:
    return int.from_bytes(hashlib.sha256(word.encode("utf-8")).digest()[:4], "little")


def tone_speech(text: str, f0: float, rate: int, seed: int = 0) -> np.ndarray:
    """Deterministic placeholder waveform: one harmonic tone burst per word.

    Pitch follows the reference estimate with a per-word offset, so
    outputs differ per speaker and per prompt without any model.
    """
    words = text.split() or ["-"]
    chunks = []
    gap = np.zeros(int(0.04 * rate), dtype=np.float32)
    for word in words:
        rng = np.random.default_rng(seed ^ _word_seed(word))
        duration = 0.12 + 0.02 * min(len(word), 8)
        t = np.arange(int(duration * rate)) / rate
        pitch = f0 * (1.0 + 0.12 * float(rng.uniform(-1.0, 1.0)))
        tone = (
            0.6 * np.sin(2 * np.pi * pitch * t)
            + 0.25 * np.sin(2 * np.pi * 2 * pitch * t)
            + 0.1 * np.sin(2 * np.pi * 3 * pitch * t)
        )
        envelope = np.sin(np.pi * np.arange(t.shape[0]) / max(1, t.shape[0])) ** 0.8
        chunks.append((0.4 * tone * envelope).astype(np.float32))
        chunks.append(gap)
    return np.concatenate(chunks[:-1]) if chunks else gap
