import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from goldenbench_adapters import audio

PROMPTS = [
    "please call stella",
    "ask her to bring these things",
    "six spoons of fresh snow peas",
]


def make_clip(f0: float, seconds: float = 0.6, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = np.arange(int(seconds * audio.TARGET_RATE)) / audio.TARGET_RATE
    wave = (
        0.5 * np.sin(2 * np.pi * f0 * t)
        + 0.2 * np.sin(2 * np.pi * 2 * f0 * t)
        + 0.02 * rng.standard_normal(t.shape[0])
    )
    envelope = np.sin(np.pi * np.arange(t.shape[0]) / t.shape[0])
    return (wave * envelope * 0.8).astype(np.float32)


def build_corpus(root: Path, speakers: dict[str, list[tuple[str, str]]]) -> Path:
    """Write an original-speech corpus: manifest plus wav/<id>.wav clips.

    speakers maps speaker id -> list of (pair_id, prompt).
    """
    wav_dir = root / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    f0s = {sid: 120.0 + 60.0 * i for i, sid in enumerate(sorted(speakers))}
    for sid, items in speakers.items():
        lines.append(json.dumps({"kind": "spk", "id": sid, "scores": {"total": 5.0}}))
        for n, (pair, prompt) in enumerate(items):
            uid = f"{sid}_{pair}"
            audio.write_wav(wav_dir / f"{uid}.wav", make_clip(f0s[sid], seed=hash((sid, n)) % 2**31))
            lines.append(
                json.dumps(
                    {
                        "kind": "utt",
                        "id": uid,
                        "speaker": sid,
                        "role": "original",
                        "pair_id": pair,
                        "prompt": prompt,
                    },
                    sort_keys=True,
                )
            )
    manifest = root / "corpus.manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


@pytest.fixture
def sample_corpus(tmp_path):
    """The 3-clip sample: two speakers, three original utterances."""
    return build_corpus(
        tmp_path / "orig",
        {
            "ann": [("p1", PROMPTS[0]), ("p2", PROMPTS[1])],
            "ben": [("p1", PROMPTS[2])],
        },
    )


def run_primary(*args: str) -> subprocess.CompletedProcess:
    """Invoke the installed goldenbench CLI, the toolkit's public surface."""
    return subprocess.run(
        [sys.executable, "-m", "goldenbench.cli", *args],
        capture_output=True,
        text=True,
    )


def validate_ok(manifest: Path) -> None:
    proc = run_primary("validate", "--manifest", str(manifest))
    assert proc.returncode == 0, f"validate failed:\n{proc.stdout}{proc.stderr}"
    assert "0 errors" in proc.stdout
