#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures.

Writes two corpora under tests/fixtures/:

  ok/       a minimal consistent corpus (two speakers, one golden pair)
  synth40/  a 40-speaker synthetic corpus in which golden frame embeddings
            are the originals plus noise scaled by (10 - proficiency), so
            warp cost must correlate strongly and negatively with score

Deterministic for a fixed seed; rerunning reproduces the same bytes.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from goldenbench.corpus import EmbeddingSequence, write_embedding_file

SEED = 1234
N_SPEAKERS = 40
UTTS_PER_SPEAKER = 3
FRAME_DIM = 6
SPK_DIM = 16

PROMPT_BANK = [
    "the north wind and the sun were disputing which was the stronger",
    "please call stella and ask her to bring these things from the store",
    "six spoons of fresh snow peas and five thick slabs of blue cheese",
    "a king ruled the state in the early days of the republic",
    "the rainbow is a division of white light into many beautiful colors",
    "we can see a long row of boats anchored near the old harbor wall",
    "children ran along the sandy shore collecting smooth round pebbles",
    "every morning she reads the paper before the first cup of coffee",
]

JUNK_WORDS = ["zan", "blor", "quim", "dref", "plon", "skit"]


def unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def corrupt(tokens: list[str], rng: np.random.Generator, p_sub: float, p_del: float) -> str:
    out = []
    for tok in tokens:
        roll = rng.random()
        if roll < p_del:
            continue
        if roll < p_del + p_sub:
            out.append(JUNK_WORDS[int(rng.integers(len(JUNK_WORDS)))])
        else:
            out.append(tok)
    if rng.random() < 0.05:
        out.append(JUNK_WORDS[int(rng.integers(len(JUNK_WORDS)))])
    return " ".join(out)


def write_ok(root: Path) -> None:
    rng = np.random.default_rng(SEED)
    emb = root / "emb"
    emb.mkdir(parents=True, exist_ok=True)
    lines = []
    for sid, score in (("alice", 7.5), ("bob", 5.0)):
        lines.append(json.dumps({"kind": "spk", "id": sid, "scores": {"total": score}}))

    def utt(uid, sid, role, pair, prompt, hyp, frame_t):
        spk_path = f"emb/{uid}_spk.gseb"
        frame_path = f"emb/{uid}_frame.gseb"
        write_embedding_file(root / spk_path, EmbeddingSequence(rng.standard_normal((1, 8))))
        write_embedding_file(
            root / frame_path, EmbeddingSequence(rng.standard_normal((frame_t, 4)))
        )
        lines.append(
            json.dumps(
                {
                    "kind": "utt", "id": uid, "speaker": sid, "role": role,
                    "pair_id": pair, "prompt": prompt, "hyp": hyp,
                    "spk_emb": spk_path, "frame_emb": frame_path, "mos": 3.5,
                },
                sort_keys=True,
            )
        )

    utt("alice_p1_org", "alice", "original", "p1", PROMPT_BANK[0], PROMPT_BANK[0], 6)
    utt("alice_p1_gld", "alice", "golden", "p1", PROMPT_BANK[0], PROMPT_BANK[0], 5)
    utt("bob_p1_org", "bob", "original", "p1", PROMPT_BANK[1], PROMPT_BANK[1], 7)
    (root / "ok.manifest.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_synth40(root: Path) -> None:
    rng = np.random.default_rng(SEED)
    spk_dir = root / "emb" / "spk"
    frame_dir = root / "emb" / "frame"
    spk_dir.mkdir(parents=True, exist_ok=True)
    frame_dir.mkdir(parents=True, exist_ok=True)

    lines = ["# synthetic fixture corpus; regenerate with scripts/make_fixtures.py"]
    l1_voice = unit(rng.standard_normal(SPK_DIM))

    for i in range(N_SPEAKERS):
        sid = f"s{i + 1:02d}"
        score = float(2 + (i % 8))  # eight proficiency levels, five speakers each
        toefl = 60.0 + 4.0 * score
        group = "adult" if i % 2 == 0 else "child"
        lines.append(
            json.dumps(
                {"kind": "spk", "id": sid, "scores": {"total": score, "toefl": toefl}, "group": group},
                sort_keys=True,
            )
        )
        base_voice = unit(rng.standard_normal(SPK_DIM))

        for k in range(UTTS_PER_SPEAKER):
            pair = f"p{k + 1}"
            prompt = PROMPT_BANK[(i * UTTS_PER_SPEAKER + k) % len(PROMPT_BANK)]
            tokens = prompt.split()
            frame_t = 9 + ((i * UTTS_PER_SPEAKER + k) % 4)

            orig_frames = rng.standard_normal((frame_t, FRAME_DIM))
            noise_scale = 0.045 * (10.0 - score)
            gold_frames = orig_frames + noise_scale * rng.standard_normal((frame_t, FRAME_DIM))

            for role, suffix, frames, spk_noise, p_sub, p_del, mos_base in (
                ("original", "org", orig_frames, 0.35, 0.10, 0.03, 3.8),
                ("golden", "gld", gold_frames, 0.80, 0.045, 0.015, 3.6),
                ("l1", "l1", None, None, 0.04, 0.01, 3.5),
            ):
                uid = f"{sid}_{pair}_{suffix}"
                if role == "l1":
                    # One native voice, mildly tinted toward the speaker.
                    voice = unit(
                        l1_voice + 0.5 * base_voice + 0.2 * unit(rng.standard_normal(SPK_DIM))
                    )
                else:
                    voice = unit(base_voice + spk_noise * unit(rng.standard_normal(SPK_DIM)))
                spk_path = f"emb/spk/{uid}.gseb"
                write_embedding_file(root / spk_path, EmbeddingSequence(voice.reshape(1, -1)))

                record = {
                    "kind": "utt", "id": uid, "speaker": sid, "role": role,
                    "pair_id": pair, "prompt": prompt,
                    "hyp": corrupt(tokens, rng, p_sub, p_del),
                    "spk_emb": spk_path,
                    "mos": float(np.clip(round(mos_base + 0.15 * rng.standard_normal(), 2), 1.0, 5.0)),
                }
                if frames is not None:
                    frame_path = f"emb/frame/{uid}.gseb"
                    write_embedding_file(root / frame_path, EmbeddingSequence(frames))
                    record["frame_emb"] = frame_path
                lines.append(json.dumps(record, sort_keys=True))

    (root / "corpus.manifest.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--dest",
        default=Path(__file__).resolve().parent.parent / "tests" / "fixtures",
        type=Path,
    )
    args = parser.parse_args()
    write_ok(args.dest / "ok")
    write_synth40(args.dest / "synth40")
    print(f"fixtures written under {args.dest}")


if __name__ == "__main__":
    main()
