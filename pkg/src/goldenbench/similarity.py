"""Cosine similarity and the two corpus-level speaker-similarity metrics.

SECS_utt averages cos(e_i, e_hat_i) over same-content pairs, per speaker,
then takes an unweighted mean over speakers.  SECS_spk averages the full
original x synthesized cosine grid of each speaker (diagonal included by
default; see exclude_diagonal) before the same unweighted speaker mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus import CorpusManifest, EmbeddingSequence, Role, paired_utterances
from .errors import MetricError


def cosine(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """a.b / (|a||b|), computed in 64-bit."""
    av = np.asarray(a, dtype=np.float64).ravel()
    bv = np.asarray(b, dtype=np.float64).ravel()
    if av.shape != bv.shape:
        raise MetricError(f"dim mismatch: {av.shape[0]} vs {bv.shape[0]}")
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        raise MetricError("cosine similarity is undefined for a zero-norm vector")
    return float(np.dot(av, bv) / (na * nb))


@dataclass
class SpeakerEmbeddingSet:
    """Per-speaker original and synthesized embedding lists.

    For SECS_utt, index i of both lists must refer to the same prompt.
    """

    speaker_id: str
    original: list[np.ndarray]
    synthesized: list[np.ndarray]

    def __post_init__(self):
        if not self.original or not self.synthesized:
            raise MetricError(f"speaker {self.speaker_id!r} has an empty embedding list")
        dims = {v.shape[-1] for v in self.original} | {v.shape[-1] for v in self.synthesized}
        if len(dims) != 1:
            raise MetricError(f"speaker {self.speaker_id!r} mixes embedding dims {sorted(dims)}")


@dataclass
class SecsReport:
    per_speaker_utt: dict[str, float] = field(default_factory=dict)
    per_speaker_spk: dict[str, float] = field(default_factory=dict)
    corpus_utt: float = 0.0
    corpus_spk: float = 0.0


def per_speaker_secs_utt(sets: list[SpeakerEmbeddingSet]) -> dict[str, float]:
    if not sets:
        raise MetricError("no speakers to evaluate")
    out: dict[str, float] = {}
    for s in sets:
        if len(s.original) != len(s.synthesized):
            raise MetricError(
                f"speaker {s.speaker_id!r}: paired-length mismatch "
                f"({len(s.original)} original vs {len(s.synthesized)} synthesized)"
            )
        sims = [cosine(e, e_hat) for e, e_hat in zip(s.original, s.synthesized)]
        out[s.speaker_id] = sum(sims) / len(sims)
    return out


def per_speaker_secs_spk(
    sets: list[SpeakerEmbeddingSet], exclude_diagonal: bool = False
) -> dict[str, float]:
    if not sets:
        raise MetricError("no speakers to evaluate")
    out: dict[str, float] = {}
    for s in sets:
        n_orig, n_syn = len(s.original), len(s.synthesized)
        if exclude_diagonal:
            if n_orig != n_syn:
                raise MetricError(
                    f"speaker {s.speaker_id!r}: diagonal exclusion needs paired lists "
                    f"({n_orig} vs {n_syn})"
                )
            if n_orig < 2:
                raise MetricError(
                    f"speaker {s.speaker_id!r}: diagonal exclusion needs >= 2 utterances"
                )
        total = 0.0
        count = 0
        for i, e in enumerate(s.original):
            for j, e_hat in enumerate(s.synthesized):
                if exclude_diagonal and i == j:
                    continue
                total += cosine(e, e_hat)
                count += 1
        out[s.speaker_id] = total / count
    return out


def secs_utt(sets: list[SpeakerEmbeddingSet]) -> float:
    """Unweighted speaker mean of same-content pair similarities."""
    per = per_speaker_secs_utt(sets)
    return sum(per.values()) / len(per)


def secs_spk(sets: list[SpeakerEmbeddingSet], exclude_diagonal: bool = False) -> float:
    """Unweighted speaker mean over each speaker's full cosine grid.

    With equal-length lists the normalizer is U_s**2 (or U_s*(U_s - 1)
    when the diagonal is excluded); unequal lists normalize by the grid
    size |original| * |synthesized|.
    """
    per = per_speaker_secs_spk(sets, exclude_diagonal=exclude_diagonal)
    return sum(per.values()) / len(per)


def secs_report(sets: list[SpeakerEmbeddingSet], exclude_diagonal: bool = False) -> SecsReport:
    utt = per_speaker_secs_utt(sets)
    spk = per_speaker_secs_spk(sets, exclude_diagonal=exclude_diagonal)
    return SecsReport(
        per_speaker_utt=utt,
        per_speaker_spk=spk,
        corpus_utt=sum(utt.values()) / len(utt),
        corpus_spk=sum(spk.values()) / len(spk),
    )


def collect_embedding_sets(
    manifest: CorpusManifest,
    reader: Callable[[str], EmbeddingSequence],
    role: Role,
) -> list[SpeakerEmbeddingSet]:
    """Build per-speaker embedding sets comparing `role` against originals.

    Pairs follow (speaker, pair_id); role=original compares the originals
    against themselves, the upper-bound configuration.  The reader maps a
    manifest-relative path to its embedding; speaker embeddings must have
    frame_count = 1.
    """
    pairs = paired_utterances(manifest, role)
    per_speaker: dict[str, SpeakerEmbeddingSet] = {}
    for orig, synth in pairs:
        vectors = []
        for u in (orig, synth):
            if u.speaker_embedding_path is None:
                raise MetricError(f"utterance {u.utterance_id!r} has no speaker embedding")
            emb = reader(u.speaker_embedding_path)
            if emb.frame_count != 1:
                raise MetricError(
                    f"utterance {u.utterance_id!r}: speaker embedding must have "
                    f"frame_count=1, got {emb.frame_count}"
                )
            vectors.append(emb.as_float64().ravel())
        entry = per_speaker.get(orig.speaker_id)
        if entry is None:
            per_speaker[orig.speaker_id] = SpeakerEmbeddingSet(
                speaker_id=orig.speaker_id, original=[vectors[0]], synthesized=[vectors[1]]
            )
        else:
            entry.original.append(vectors[0])
            entry.synthesized.append(vectors[1])
    if not per_speaker:
        raise MetricError(f"no utterances with role {role.value!r}")
    return list(per_speaker.values())
