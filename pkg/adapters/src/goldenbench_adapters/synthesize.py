"""Synthesize golden speech for every original utterance in a corpus.

Reads an original-speech manifest plus its audio, conditions the synthesis
backend on per-speaker reference audio (the speaker's first original
clip), and writes a self-contained output corpus: copied original audio,
synthesized golden audio, and a manifest extending the input with one
role=golden line per (speaker, pair).
"""

from __future__ import annotations

import argparse
import shutil
import sys
from pathlib import Path

from . import audio
from .backends import BackendError, backend_choices
from .common import add_provenance, default_audio_dir, finish, load_backend, log, wav_for
from .manifest_io import load_manifest, save_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", required=True, help="original-speech corpus manifest")
    parser.add_argument("--audio-dir", default=None, help="original audio (default: wav/ next to manifest)")
    parser.add_argument("--outdir", required=True, help="output corpus directory")
    parser.add_argument("--backend", choices=backend_choices("synth"), default="yourtts")
    parser.add_argument("--model", default=None, help="backend model identifier")
    parser.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    doc = load_manifest(args.manifest)
    audio_dir = Path(args.audio_dir) if args.audio_dir else default_audio_dir(args.manifest)
    outdir = Path(args.outdir)
    out_wav = outdir / "wav"

    backend = load_backend("synth", args.backend, args.model, seed=args.seed)
    if backend is None:
        return 1

    originals = [u for u in doc.utterances() if u.get("role") == "original"]
    reference: dict[str, Path] = {}
    for utt in originals:
        wav = wav_for(audio_dir, utt["id"])
        if utt["speaker"] not in reference and wav.is_file():
            reference[utt["speaker"]] = wav

    done = failed = 0
    golden_records = []
    for utt in originals:
        source = wav_for(audio_dir, utt["id"])
        ref = reference.get(utt["speaker"])
        if ref is None:
            log(f"skip {utt['id']}: no reference audio for speaker {utt['speaker']}")
            failed += 1
            continue
        if not source.is_file():
            log(f"skip {utt['id']}: missing audio {source}")
            failed += 1
            continue
        golden_id = f"{utt['id']}_gld"
        try:
            samples = backend.synthesize(utt["prompt"], ref)
            audio.write_wav(wav_for(out_wav, golden_id), samples)
            shutil.copy2(source, wav_for(out_wav, utt["id"]))
        except (BackendError, OSError, ValueError) as exc:
            log(f"skip {utt['id']}: {exc}")
            failed += 1
            continue
        golden_records.append(
            {
                "kind": "utt",
                "id": golden_id,
                "speaker": utt["speaker"],
                "role": "golden",
                "pair_id": utt["pair_id"],
                "prompt": utt["prompt"],
            }
        )
        done += 1

    add_provenance(doc, "synthesize", args.backend, args.model)
    for record in golden_records:
        doc.append(record)
    save_manifest(doc, outdir / "corpus.manifest.jsonl")
    return finish(done, failed, "synthesize")


if __name__ == "__main__":
    sys.exit(main())
