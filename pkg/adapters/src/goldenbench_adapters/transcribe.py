"""Transcribe corpus audio and write hypotheses back into the manifest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import BackendError, backend_choices
from .common import add_provenance, default_audio_dir, finish, load_backend, log, wav_for
from .manifest_io import load_manifest, save_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--audio-dir", default=None, help="audio (default: wav/ next to manifest)")
    parser.add_argument("--out", default=None, help="output manifest (default: rewrite in place)")
    parser.add_argument("--backend", choices=backend_choices("transcribe"), default="whisperx")
    parser.add_argument("--model", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    doc = load_manifest(args.manifest)
    audio_dir = Path(args.audio_dir) if args.audio_dir else default_audio_dir(args.manifest)

    backend = load_backend("transcribe", args.backend, args.model)
    if backend is None:
        return 1

    done = failed = 0
    for utt in doc.utterances():
        wav = wav_for(audio_dir, utt["id"])
        if not wav.is_file():
            log(f"skip {utt['id']}: missing audio {wav}")
            failed += 1
            continue
        try:
            utt["hyp"] = backend.transcribe(wav, utt.get("prompt", ""))
        except (BackendError, OSError, ValueError) as exc:
            log(f"skip {utt['id']}: {exc}")
            failed += 1
            continue
        done += 1

    add_provenance(doc, "transcribe", args.backend, args.model)
    save_manifest(doc, args.out or args.manifest)
    return finish(done, failed, "transcribe")


if __name__ == "__main__":
    sys.exit(main())
