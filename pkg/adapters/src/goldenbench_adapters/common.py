"""Conventions shared by the adapter scripts.

Audio for utterance `<id>` lives at `<audio dir>/<id>.wav`; the audio dir
defaults to `wav/` next to the manifest.  Each script appends one
provenance comment naming itself, its backend, and the model identifier.
"""

from __future__ import annotations

import sys
from pathlib import Path

from .backends import BackendError, make_backend
from .manifest_io import ManifestDoc


def default_audio_dir(manifest_path: str | Path) -> Path:
    return Path(manifest_path).parent / "wav"


def wav_for(audio_dir: Path, utterance_id: str) -> Path:
    return audio_dir / f"{utterance_id}.wav"


def add_provenance(doc: ManifestDoc, adapter: str, backend: str, model: str | None) -> None:
    doc.add_comment(f"adapter={adapter} backend={backend} model={model or 'default'}")


def log(message: str) -> None:
    print(message, file=sys.stderr)


def load_backend(task: str, name: str, *args, **kwargs):
    """Construct a backend, mapping any load failure to None plus a log line."""
    try:
        return make_backend(task, name, *args, **kwargs)
    except BackendError as exc:
        log(f"error: {exc}")
    except Exception as exc:  # model load failures (downloads, checkpoints)
        log(f"error: failed to load {name} backend: {exc}")
    return None


def finish(done: int, failed: int, label: str) -> int:
    log(f"{label}: {done} ok, {failed} failed")
    return 0 if done > 0 or failed == 0 else 1
