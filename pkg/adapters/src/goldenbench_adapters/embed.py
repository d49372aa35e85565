"""Extract frame or speaker embeddings into GSEB files.

Frame embeddings land in emb/frame/, speaker embeddings (one row each) in
emb/spk/, both relative to the output manifest's directory; the matching
manifest fields are filled in.  With --workers > 1 the items run in
worker processes, each holding its own backend instance.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import sys
from pathlib import Path

import numpy as np

from . import gseb
from .backends import BackendError, backend_choices, make_backend
from .common import add_provenance, default_audio_dir, finish, log, wav_for
from .manifest_io import load_manifest, save_manifest

_worker_backend = None
_worker_kind = None


def _init_worker(kind: str, backend_name: str, model: str | None) -> None:
    global _worker_backend, _worker_kind
    _worker_backend = make_backend("embed", backend_name, model)
    _worker_kind = kind


def _extract(task: tuple[str, str, str]) -> tuple[str, np.ndarray | None, str]:
    utt_id, wav_path, _ = task
    try:
        if _worker_kind == "speaker":
            values = _worker_backend.speaker(Path(wav_path))
        else:
            values = _worker_backend.frames(Path(wav_path))
        return utt_id, values, ""
    except (BackendError, OSError, ValueError) as exc:
        return utt_id, None, str(exc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--audio-dir", default=None, help="audio (default: wav/ next to manifest)")
    parser.add_argument("--out", default=None, help="output manifest (default: rewrite in place)")
    parser.add_argument("--kind", choices=("frame", "speaker"), required=True)
    parser.add_argument("--backend", default=None, help="default: wav2vec2 for frame, resemblyzer for speaker")
    parser.add_argument("--model", default=None)
    parser.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    backend_name = args.backend or ("wav2vec2" if args.kind == "frame" else "resemblyzer")
    if backend_name not in backend_choices("embed"):
        log(f"error: unknown embed backend {backend_name!r}; choices: {backend_choices('embed')}")
        return 2
    doc = load_manifest(args.manifest)
    audio_dir = Path(args.audio_dir) if args.audio_dir else default_audio_dir(args.manifest)
    out_manifest = Path(args.out or args.manifest)
    subdir = "frame" if args.kind == "frame" else "spk"
    field = "frame_emb" if args.kind == "frame" else "spk_emb"
    emb_dir = out_manifest.parent / "emb" / subdir

    tasks = []
    for utt in doc.utterances():
        wav = wav_for(audio_dir, utt["id"])
        if not wav.is_file():
            log(f"skip {utt['id']}: missing audio {wav}")
            continue
        tasks.append((utt["id"], str(wav), field))

    try:
        if args.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(
                max_workers=args.workers,
                initializer=_init_worker,
                initargs=(args.kind, backend_name, args.model),
            ) as pool:
                outcomes = list(pool.map(_extract, tasks))
        else:
            _init_worker(args.kind, backend_name, args.model)
            outcomes = [_extract(task) for task in tasks]
    except BackendError as exc:
        log(f"error: {exc}")
        return 1
    except Exception as exc:  # model load failures (downloads, checkpoints)
        log(f"error: failed to load {backend_name} backend: {exc}")
        return 1

    by_id = {u["id"]: u for u in doc.utterances()}
    done = failed = 0
    for utt_id, values, error in outcomes:
        if values is None:
            log(f"skip {utt_id}: {error}")
            failed += 1
            continue
        relpath = f"emb/{subdir}/{utt_id}.gseb"
        gseb.save(values, out_manifest.parent / relpath)
        by_id[utt_id][field] = relpath
        done += 1

    add_provenance(doc, f"embed-{args.kind}", backend_name, args.model)
    save_manifest(doc, out_manifest)
    return finish(done, failed, f"embed {args.kind}")


if __name__ == "__main__":
    sys.exit(main())
