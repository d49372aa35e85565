"""Token alignment, WER, WERR, and corpus-level pooled WER.

The corpus figure is the pooled (micro) rate sum(S+D+I)/sum(N); a macro
per-utterance average is available for comparison.  Alignment counts are
reproducible even when several optimal alignments exist: the backtrace
prefers substitution over insertion over deletion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import CorpusManifest, Role
from .errors import MetricError


@dataclass(frozen=True)
class NormalizationPolicy:
    """Deterministic text normalization applied before tokenization.

    strip_punctuation removes every character that is not a letter, digit,
    apostrophe, or whitespace.
    """

    lowercase: bool = True
    strip_punctuation: bool = True
    collapse_whitespace: bool = True


DEFAULT_POLICY = NormalizationPolicy()


@dataclass(frozen=True)
class AlignmentCounts:
    substitutions: int
    deletions: int
    insertions: int
    reference_length: int

    def __post_init__(self):
        if min(self.substitutions, self.deletions, self.insertions, self.reference_length) < 0:
            raise ValueError("alignment counts must be nonnegative")
        if self.substitutions + self.deletions > self.reference_length:
            raise ValueError("S + D cannot exceed the reference length")

    @property
    def total_errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    def __add__(self, other: "AlignmentCounts") -> "AlignmentCounts":
        return AlignmentCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.reference_length + other.reference_length,
        )


def _keep_char(c: str) -> bool:
    return c.isalnum() or c == "'" or c.isspace()


def normalize_text(text: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> str:
    if policy.lowercase:
        text = text.lower()
    if policy.strip_punctuation:
        text = "".join(c for c in text if _keep_char(c))
    if policy.collapse_whitespace:
        text = " ".join(text.split())
    return text


def normalize_tokens(text: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> list[str]:
    """Normalize and split into tokens.  Idempotent for any policy."""
    return normalize_text(text, policy).split()


def align_tokens(reference: list[str], hypothesis: list[str]) -> AlignmentCounts:
    """Minimum-edit-distance alignment under unit costs.

    Ties during backtrace are broken substitution > insertion > deletion
    so the individual counts are deterministic.
    """
    n, m = len(reference), len(hypothesis)
    # dist[i][j] = edit distance between reference[:i] and hypothesis[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        ref_tok = reference[i - 1]
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ref_tok != hypothesis[j - 1])
            ins = row[j - 1] + 1
            dele = prev[j] + 1
            row[j] = min(sub, ins, dele)

    s = d = ins_count = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (
            reference[i - 1] != hypothesis[j - 1]
        ):
            if reference[i - 1] != hypothesis[j - 1]:
                s += 1
            i -= 1
            j -= 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            ins_count += 1
            j -= 1
        else:
            d += 1
            i -= 1
    return AlignmentCounts(s, d, ins_count, n)


def wer(counts: AlignmentCounts) -> float:
    """(S + D + I) / N.  May exceed 1 when insertions dominate."""
    if counts.reference_length == 0:
        raise MetricError("WER is undefined for an empty reference (N = 0)")
    return counts.total_errors / counts.reference_length


def werr(baseline_wer: float, system_wer: float) -> float:
    """Relative error-rate reduction versus a baseline, in percent."""
    if baseline_wer <= 0:
        raise MetricError(f"WERR is undefined for baseline WER {baseline_wer} (must be > 0)")
    return 100.0 * (baseline_wer - system_wer) / baseline_wer


def corpus_counts(
    manifest: CorpusManifest,
    role: Role,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> list[tuple[str, AlignmentCounts]]:
    """Per-utterance alignment counts for a role, in manifest order."""
    selected = manifest.with_role(role)
    if not selected:
        raise MetricError(f"no utterances with role {role.value!r}")
    missing = [u.utterance_id for u in selected if u.asr_hypothesis is None]
    if missing:
        raise MetricError(
            f"{len(missing)} utterance(s) with role {role.value!r} lack a hypothesis: "
            + ", ".join(missing[:5])
            + ("..." if len(missing) > 5 else "")
        )
    out = []
    for u in selected:
        ref = normalize_tokens(u.text_prompt, policy)
        hyp = normalize_tokens(u.asr_hypothesis, policy)
        out.append((u.utterance_id, align_tokens(ref, hyp)))
    return out


def corpus_wer(
    manifest: CorpusManifest,
    role: Role,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    macro: bool = False,
) -> float:
    """Corpus WER for a role: pooled by default, per-utterance mean with macro."""
    per_utt = corpus_counts(manifest, role, policy)
    if macro:
        rates = []
        for uid, counts in per_utt:
            if counts.reference_length == 0:
                raise MetricError(f"utterance {uid!r} has an empty reference after normalization")
            rates.append(wer(counts))
        return sum(rates) / len(rates)
    pooled = AlignmentCounts(0, 0, 0, 0)
    for _, counts in per_utt:
        pooled = pooled + counts
    return wer(pooled)
