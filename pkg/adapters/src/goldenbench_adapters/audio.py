"""Minimal WAV handling: 16-bit PCM read/write plus linear resampling.

Every backend consumes mono float32 at 16 kHz; decoding other containers
is out of scope for the adapters.
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

TARGET_RATE = 16000


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Return (mono float32 samples in [-1, 1], sample rate)."""
    with wave.open(str(path), "rb") as fh:
        n_channels = fh.getnchannels()
        width = fh.getsampwidth()
        rate = fh.getframerate()
        frames = fh.readframes(fh.getnframes())
    if width != 2:
        raise ValueError(f"{path}: only 16-bit PCM supported, got {8 * width}-bit")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.float32) / 32768.0
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    return samples, rate


def write_wav(path: str | Path, samples: np.ndarray, rate: int = TARGET_RATE) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    clipped = np.clip(samples, -1.0, 1.0)
    pcm = (clipped * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())


def resample(samples: np.ndarray, rate: int, target_rate: int = TARGET_RATE) -> np.ndarray:
    if rate == target_rate:
        return samples
    duration = samples.shape[0] / rate
    n_out = max(1, int(round(duration * target_rate)))
    src_t = np.arange(samples.shape[0]) / rate
    dst_t = np.arange(n_out) / target_rate
    return np.interp(dst_t, src_t, samples).astype(np.float32)


def load_mono_16k(path: str | Path) -> np.ndarray:
    samples, rate = read_wav(path)
    return resample(samples, rate)
