"""Corpus data model, manifest parsing, and the GSEB embedding file format.

A corpus is described by a line-delimited manifest (one JSON object per
line).  Two record kinds exist:

    {"kind": "utt", "id": ..., "speaker": ..., "role": "original|golden|l1",
     "pair_id": ..., "prompt": ..., "hyp": ?, "spk_emb": ?, "frame_emb": ?,
     "mos": ?}
    {"kind": "spk", "id": ..., "scores": {name: number, ...}, "group": ?}

Blank lines and lines starting with ``#`` are skipped, so adapter scripts
can append records incrementally and record provenance as comments.
Asset paths are relative to the manifest's directory and must not contain
parent-directory segments.

Embeddings are stored in GSEB files, a fixed little-endian layout:

    bytes 0-3    ASCII "GSEB"
    bytes 4-7    u32 version, currently 1
    bytes 8-11   u32 frame_count  (>= 1; 1 for a speaker embedding)
    bytes 12-15  u32 dim          (>= 1)
    then         frame_count * dim IEEE-754 float32 values, row-major

Values are stored in 32-bit precision; downstream math promotes to 64-bit.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path, PurePosixPath
from typing import Callable, Iterable

import numpy as np

from .errors import EmbeddingFormatError, ManifestError

GSEB_MAGIC = b"GSEB"
GSEB_VERSION = 1
_HEADER = struct.Struct("<4sIII")


class Role(str, Enum):
    """Provenance of an utterance's audio."""

    ORIGINAL = "original"
    GOLDEN = "golden"
    L1 = "l1"

    @classmethod
    def parse(cls, value: str) -> "Role":
        try:
            return cls(value)
        except ValueError:
            legal = ", ".join(r.value for r in cls)
            raise ValueError(f"unknown role {value!r}; legal roles are: {legal}") from None


@dataclass(frozen=True)
class UtteranceRecord:
    utterance_id: str
    speaker_id: str
    role: Role
    pair_id: str
    text_prompt: str
    asr_hypothesis: str | None = None
    speaker_embedding_path: str | None = None
    frame_embedding_path: str | None = None
    mos: float | None = None

    def __post_init__(self):
        if not self.utterance_id:
            raise ValueError("utterance id must be nonempty")
        if not self.speaker_id:
            raise ValueError("speaker id must be nonempty")
        if not self.pair_id:
            raise ValueError("pair_id must be nonempty")
        if self.mos is not None and not (1.0 <= self.mos <= 5.0):
            raise ValueError(f"mos {self.mos} outside [1, 5]")
        for p in (self.speaker_embedding_path, self.frame_embedding_path):
            if p is not None:
                _check_relative_path(p)


@dataclass(frozen=True)
class SpeakerRecord:
    speaker_id: str
    scores: dict[str, float] = field(default_factory=dict)
    group: str | None = None

    def __post_init__(self):
        if not self.speaker_id:
            raise ValueError("speaker id must be nonempty")
        for name, value in self.scores.items():
            if not name:
                raise ValueError("score names must be nonempty")
            if not math.isfinite(value):
                raise ValueError(f"score {name!r} is not finite")


@dataclass
class CorpusManifest:
    utterances: list[UtteranceRecord]
    speakers: list[SpeakerRecord]
    corpus_id: str = ""

    def speaker_map(self) -> dict[str, SpeakerRecord]:
        return {s.speaker_id: s for s in self.speakers}

    def with_role(self, role: Role) -> list[UtteranceRecord]:
        return [u for u in self.utterances if u.role is role]

    def counterpart_index(self) -> dict[tuple[str, str, Role], UtteranceRecord]:
        """Index utterances by (speaker_id, pair_id, role).

        Later records win on duplicates; validate_corpus flags those.
        """
        return {(u.speaker_id, u.pair_id, u.role): u for u in self.utterances}


@dataclass(frozen=True)
class EmbeddingSequence:
    """A frames x dim matrix of finite float32 values.

    frame_count == 1 is the speaker-embedding special case.
    """

    values: np.ndarray

    def __post_init__(self):
        # Own copy: freezing a view handed in by the caller would make
        # their array read-only as a side effect.
        arr = np.array(self.values, dtype=np.float32, order="C", copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"embedding must be a nonempty 2-D matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def frame_count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def as_float64(self) -> np.ndarray:
        return self.values.astype(np.float64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingSequence):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )


@dataclass
class ValidationReport:
    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, locator: str, message: str) -> None:
        self.errors.append((locator, message))

    def warn(self, locator: str, message: str) -> None:
        self.warnings.append((locator, message))


def _check_relative_path(p: str) -> None:
    pure = PurePosixPath(p)
    if pure.is_absolute() or p.startswith("\\"):
        raise ValueError(f"asset path {p!r} must be relative to the manifest directory")
    if ".." in pure.parts:
        raise ValueError(f"asset path {p!r} contains a parent-directory segment")


# ---------------------------------------------------------------------------
# Manifest parsing and serialization
# ---------------------------------------------------------------------------

_UTT_REQUIRED = ("id", "speaker", "role", "pair_id", "prompt")
_UTT_OPTIONAL = ("hyp", "spk_emb", "frame_emb", "mos")
_SPK_REQUIRED = ("id", "scores")
_SPK_OPTIONAL = ("group",)


def parse_manifest(text: str | Iterable[str], corpus_id: str = "") -> CorpusManifest:
    """Parse a line-delimited manifest into a CorpusManifest.

    Raises ManifestError with the offending 1-based line number for
    malformed lines, unknown roles, missing required fields, and
    duplicate utterance ids.  Cross-record consistency (speaker
    references, golden/original pairing, assets) is validate_corpus's
    job, not the parser's.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    utterances: list[UtteranceRecord] = []
    speakers: list[SpeakerRecord] = []
    seen_utt: dict[str, int] = {}
    seen_spk: dict[str, int] = {}

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"malformed record: {exc.msg}", lineno) from None
        if not isinstance(obj, dict):
            raise ManifestError("record must be a JSON object", lineno)

        kind = obj.get("kind")
        if kind == "utt":
            utterances.append(_parse_utt(obj, lineno, seen_utt))
        elif kind == "spk":
            speakers.append(_parse_spk(obj, lineno, seen_spk))
        else:
            raise ManifestError(f"unknown record kind {kind!r} (expected 'utt' or 'spk')", lineno)

    return CorpusManifest(utterances=utterances, speakers=speakers, corpus_id=corpus_id)


def _require(obj: dict, names: tuple[str, ...], lineno: int) -> None:
    for name in names:
        if name not in obj:
            raise ManifestError(f"missing required field {name!r}", lineno)


def _parse_utt(obj: dict, lineno: int, seen: dict[str, int]) -> UtteranceRecord:
    _require(obj, _UTT_REQUIRED, lineno)
    uid = obj["id"]
    if not isinstance(uid, str):
        raise ManifestError("field 'id' must be a string", lineno)
    if uid in seen:
        raise ManifestError(
            f"duplicate utterance id {uid!r} (first seen on line {seen[uid]})", lineno
        )
    try:
        role = Role.parse(obj["role"])
        mos = obj.get("mos")
        record = UtteranceRecord(
            utterance_id=uid,
            speaker_id=str(obj["speaker"]),
            role=role,
            pair_id=str(obj["pair_id"]),
            text_prompt=str(obj["prompt"]),
            asr_hypothesis=None if obj.get("hyp") is None else str(obj["hyp"]),
            speaker_embedding_path=obj.get("spk_emb"),
            frame_embedding_path=obj.get("frame_emb"),
            mos=None if mos is None else float(mos),
        )
    except (ValueError, TypeError) as exc:
        raise ManifestError(str(exc), lineno) from None
    seen[uid] = lineno
    return record


def _parse_spk(obj: dict, lineno: int, seen: dict[str, int]) -> SpeakerRecord:
    _require(obj, _SPK_REQUIRED, lineno)
    sid = obj["id"]
    if not isinstance(sid, str):
        raise ManifestError("field 'id' must be a string", lineno)
    if sid in seen:
        raise ManifestError(
            f"duplicate speaker id {sid!r} (first seen on line {seen[sid]})", lineno
        )
    scores = obj["scores"]
    if not isinstance(scores, dict):
        raise ManifestError("field 'scores' must be a name -> number map", lineno)
    try:
        record = SpeakerRecord(
            speaker_id=sid,
            scores={str(k): float(v) for k, v in scores.items()},
            group=None if obj.get("group") is None else str(obj["group"]),
        )
    except (ValueError, TypeError) as exc:
        raise ManifestError(str(exc), lineno) from None
    seen[sid] = lineno
    return record


def parse_manifest_file(path: str | Path) -> CorpusManifest:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    corpus_id = path.name.removesuffix(".jsonl").removesuffix(".manifest")
    return parse_manifest(text, corpus_id=corpus_id)


def serialize_manifest(manifest: CorpusManifest) -> str:
    """Render a manifest back to its line-delimited form.

    Speaker records come first, then utterances in input order; comment
    lines from the source are not preserved.
    """
    out = []
    for s in manifest.speakers:
        obj: dict = {"kind": "spk", "id": s.speaker_id, "scores": s.scores}
        if s.group is not None:
            obj["group"] = s.group
        out.append(json.dumps(obj, sort_keys=True))
    for u in manifest.utterances:
        obj = {
            "kind": "utt",
            "id": u.utterance_id,
            "speaker": u.speaker_id,
            "role": u.role.value,
            "pair_id": u.pair_id,
            "prompt": u.text_prompt,
        }
        if u.asr_hypothesis is not None:
            obj["hyp"] = u.asr_hypothesis
        if u.speaker_embedding_path is not None:
            obj["spk_emb"] = u.speaker_embedding_path
        if u.frame_embedding_path is not None:
            obj["frame_emb"] = u.frame_embedding_path
        if u.mos is not None:
            obj["mos"] = u.mos
        out.append(json.dumps(obj, sort_keys=True))
    return "\n".join(out) + "\n"


def merge_scores(manifest: CorpusManifest, scores: CorpusManifest) -> CorpusManifest:
    """Merge speaker records from a standalone scores file into a manifest.

    Scores for an already-known speaker are updated name by name; unknown
    speakers are appended.
    """
    merged = {s.speaker_id: s for s in manifest.speakers}
    for extra in scores.speakers:
        base = merged.get(extra.speaker_id)
        if base is None:
            merged[extra.speaker_id] = extra
        else:
            merged[extra.speaker_id] = SpeakerRecord(
                speaker_id=base.speaker_id,
                scores={**base.scores, **extra.scores},
                group=extra.group if extra.group is not None else base.group,
            )
    return CorpusManifest(
        utterances=manifest.utterances,
        speakers=list(merged.values()),
        corpus_id=manifest.corpus_id,
    )


# ---------------------------------------------------------------------------
# GSEB embedding files
# ---------------------------------------------------------------------------


def read_embedding(data: bytes) -> EmbeddingSequence:
    """Decode a GSEB payload, reconstructing the stored matrix bit-exactly."""
    if len(data) < _HEADER.size:
        raise EmbeddingFormatError(
            f"truncated header: expected at least {_HEADER.size} bytes, got {len(data)}"
        )
    magic, version, frame_count, dim = _HEADER.unpack_from(data)
    if magic != GSEB_MAGIC:
        raise EmbeddingFormatError(f"bad magic {magic!r}, expected {GSEB_MAGIC!r}")
    if version != GSEB_VERSION:
        raise EmbeddingFormatError(f"unsupported version {version}, expected {GSEB_VERSION}")
    if frame_count < 1 or dim < 1:
        raise EmbeddingFormatError(f"invalid header: frame_count={frame_count}, dim={dim}")
    expected = _HEADER.size + 4 * frame_count * dim
    if len(data) != expected:
        raise EmbeddingFormatError(
            f"payload length mismatch: expected {expected} bytes, got {len(data)}"
        )
    flat = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    if not np.all(np.isfinite(flat)):
        raise EmbeddingFormatError("payload contains non-finite values")
    return EmbeddingSequence(flat.reshape(frame_count, dim))


def write_embedding(seq: EmbeddingSequence) -> bytes:
    """Encode an EmbeddingSequence as GSEB bytes (16-byte header + f32 LE data)."""
    if not np.all(np.isfinite(seq.values)):
        raise EmbeddingFormatError("refusing to write non-finite values")
    header = _HEADER.pack(GSEB_MAGIC, GSEB_VERSION, seq.frame_count, seq.dim)
    body = np.ascontiguousarray(seq.values, dtype="<f4").tobytes()
    return header + body


def read_embedding_file(path: str | Path) -> EmbeddingSequence:
    return read_embedding(Path(path).read_bytes())


def write_embedding_file(path: str | Path, seq: EmbeddingSequence) -> None:
    Path(path).write_bytes(write_embedding(seq))


def read_embedding_header(data: bytes) -> tuple[int, int]:
    """Return (frame_count, dim) from a GSEB header without decoding values."""
    if len(data) < _HEADER.size:
        raise EmbeddingFormatError(
            f"truncated header: expected at least {_HEADER.size} bytes, got {len(data)}"
        )
    magic, version, frame_count, dim = _HEADER.unpack_from(data)
    if magic != GSEB_MAGIC:
        raise EmbeddingFormatError(f"bad magic {magic!r}, expected {GSEB_MAGIC!r}")
    if version != GSEB_VERSION:
        raise EmbeddingFormatError(f"unsupported version {version}, expected {GSEB_VERSION}")
    return frame_count, dim


# ---------------------------------------------------------------------------
# Corpus validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssetInfo:
    """What validate_corpus needs to know about a referenced file.

    size is the byte count; frame_count/dim come from the GSEB header when
    the file has one (None when the header cannot be read).
    """

    size: int
    frame_count: int | None = None
    dim: int | None = None


AssetLookup = Callable[[str], AssetInfo | None]


def dir_asset_lookup(base_dir: str | Path) -> AssetLookup:
    """Asset lookup resolving manifest-relative paths under base_dir.

    Reads only the 16-byte header of each asset, never full payloads.
    """
    base = Path(base_dir)

    def lookup(relpath: str) -> AssetInfo | None:
        target = base / relpath
        if not target.is_file():
            return None
        size = target.stat().st_size
        frame_count = dim = None
        if size >= _HEADER.size:
            with open(target, "rb") as fh:
                head = fh.read(_HEADER.size)
            try:
                frame_count, dim = read_embedding_header(head)
            except EmbeddingFormatError:
                pass
        return AssetInfo(size=size, frame_count=frame_count, dim=dim)

    return lookup


def validate_corpus(manifest: CorpusManifest, asset_lookup: AssetLookup) -> ValidationReport:
    """Check cross-record and asset consistency; problems become report entries.

    Errors: utterance referencing an unknown speaker; golden utterance
    without an original counterpart sharing (speaker, pair_id); prompt
    mismatch between golden and its original; duplicate (speaker,
    pair_id, role) combinations; missing or unreadable assets; speaker
    embeddings with more than one frame; embedding dimension
    inconsistency across the corpus (frame and speaker embeddings are
    checked as separate families).
    """
    report = ValidationReport()
    known_speakers = {s.speaker_id for s in manifest.speakers}
    by_key: dict[tuple[str, str, Role], list[UtteranceRecord]] = {}
    for u in manifest.utterances:
        by_key.setdefault((u.speaker_id, u.pair_id, u.role), []).append(u)

    for key, records in sorted(by_key.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)):
        if len(records) > 1:
            ids = ", ".join(r.utterance_id for r in records)
            report.error(
                records[0].utterance_id,
                f"duplicate (speaker, pair_id, role) = ({key[0]}, {key[1]}, {key[2].value}): {ids}",
            )

    spk_dims: dict[int, str] = {}
    frame_dims: dict[int, str] = {}
    for u in manifest.utterances:
        loc = u.utterance_id
        if u.speaker_id not in known_speakers:
            report.error(loc, f"speaker {u.speaker_id!r} has no speaker record")

        if u.role is Role.GOLDEN:
            counterpart = by_key.get((u.speaker_id, u.pair_id, Role.ORIGINAL))
            if not counterpart:
                report.error(
                    loc,
                    f"golden utterance has no original counterpart for "
                    f"(speaker={u.speaker_id}, pair_id={u.pair_id})",
                )
            elif counterpart[0].text_prompt != u.text_prompt:
                report.error(
                    loc,
                    f"prompt differs from original counterpart {counterpart[0].utterance_id!r}",
                )

        for label, path, dims, must_be_single in (
            ("spk_emb", u.speaker_embedding_path, spk_dims, True),
            ("frame_emb", u.frame_embedding_path, frame_dims, False),
        ):
            if path is None:
                continue
            info = asset_lookup(path)
            if info is None:
                report.error(loc, f"{label} asset missing: {path}")
                continue
            if info.dim is None:
                report.error(loc, f"{label} asset is not a readable embedding file: {path}")
                continue
            if must_be_single and info.frame_count != 1:
                report.error(
                    loc, f"speaker embedding must have frame_count=1, got {info.frame_count}"
                )
            dims.setdefault(info.dim, loc)

    for label, dims in (("speaker", spk_dims), ("frame", frame_dims)):
        if len(dims) > 1:
            detail = ", ".join(f"dim {d} (first at {loc})" for d, loc in sorted(dims.items()))
            report.error("corpus", f"inconsistent {label} embedding dims: {detail}")

    used = {u.speaker_id for u in manifest.utterances}
    for s in manifest.speakers:
        if s.speaker_id not in used:
            report.warn(s.speaker_id, "speaker record has no utterances")

    return report


def paired_utterances(
    manifest: CorpusManifest, role: Role
) -> list[tuple[UtteranceRecord, UtteranceRecord]]:
    """(original, counterpart) pairs for a synthesized role, ordered as the
    counterpart utterances appear in the manifest.

    Raises ManifestError when a counterpart's original is missing, since
    callers (SECS, DTW) cannot proceed without the pairing.
    """
    if role is Role.ORIGINAL:
        return [(u, u) for u in manifest.with_role(Role.ORIGINAL)]
    index = manifest.counterpart_index()
    pairs = []
    for u in manifest.with_role(role):
        orig = index.get((u.speaker_id, u.pair_id, Role.ORIGINAL))
        if orig is None:
            raise ManifestError(
                f"utterance {u.utterance_id!r} has no original counterpart for "
                f"(speaker={u.speaker_id}, pair_id={u.pair_id})"
            )
        pairs.append((orig, u))
    return pairs
