"""Statistical layer: correlation, aggregation, and distribution summaries.

Quantiles use linear interpolation between order statistics throughout,
so five-number summaries are reproducible across implementations.  PCC
renders with three decimals, WER/MOS with two.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .corpus import CorpusManifest, Role
from .errors import MetricError, ToolkitError


@dataclass
class PairedSeries:
    labels: list[str] = field(default_factory=list)
    xs: list[float] = field(default_factory=list)
    ys: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not (len(self.labels) == len(self.xs) == len(self.ys)):
            raise MetricError("labels, xs, ys must have equal lengths")


@dataclass(frozen=True)
class BoxSummary:
    group_key: float
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float


@dataclass(frozen=True)
class SeedStats:
    mean: float
    std: float
    n_runs: int


def pearson(series: PairedSeries) -> float:
    """Sample Pearson correlation coefficient, in 64-bit."""
    xs = np.asarray(series.xs, dtype=np.float64)
    ys = np.asarray(series.ys, dtype=np.float64)
    if xs.size != ys.size:
        raise MetricError(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size < 2:
        raise MetricError("correlation needs at least 2 points")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise MetricError("series contain non-finite values")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0:
        raise MetricError("xs series has zero variance")
    if vy == 0.0:
        raise MetricError("ys series has zero variance")
    return float(np.dot(dx, dy) / np.sqrt(vx * vy))


def per_speaker_mean(rows: Iterable[tuple[str, float]]) -> dict[str, float]:
    """Arithmetic mean of values grouped by speaker, in first-seen order."""
    sums: dict[str, list[float]] = {}
    for speaker_id, value in rows:
        sums.setdefault(speaker_id, []).append(value)
    return {sid: sum(vals) / len(vals) for sid, vals in sums.items()}


def mos_mean(manifest: CorpusManifest, role: Role) -> float:
    """Unweighted mean of ingested MOS values for a role."""
    values = [u.mos for u in manifest.with_role(role) if u.mos is not None]
    if not values:
        raise MetricError(f"no MOS values present for role {role.value!r}")
    return sum(values) / len(values)


def _five_numbers(values: list[float]) -> tuple[float, float, float, float, float]:
    arr = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0], method="linear")
    return float(arr.min()), float(q1), float(med), float(q3), float(arr.max())


def group_quartiles(
    rows: list[tuple[float, float]], bucket_width: float | None = None
) -> list[BoxSummary]:
    """Five-number cost summaries grouped by score.

    Groups by the exact score value, or by fixed-width buckets keyed on
    the bucket's lower edge when bucket_width is given.  Output is sorted
    ascending by group key.
    """
    if not rows:
        raise MetricError("no rows to summarize")
    if bucket_width is not None and bucket_width <= 0:
        raise MetricError("bucket width must be positive")
    groups: dict[float, list[float]] = {}
    for score, cost in rows:
        key = score if bucket_width is None else float(np.floor(score / bucket_width) * bucket_width)
        groups.setdefault(float(key), []).append(float(cost))
    out = []
    for key in sorted(groups):
        lo, q1, med, q3, hi = _five_numbers(groups[key])
        out.append(
            BoxSummary(
                group_key=key, count=len(groups[key]), min=lo, q1=q1, median=med, q3=q3, max=hi
            )
        )
    return out


def seed_stats(values: list[float]) -> SeedStats:
    """Mean and sample standard deviation over repeated runs."""
    if not values:
        raise MetricError("no values")
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return SeedStats(mean=mean, std=0.0, n_runs=1)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return SeedStats(mean=mean, std=float(np.sqrt(var)), n_runs=n)


def format_seed_stats(stats: SeedStats) -> str:
    return f"{stats.mean:.3f} ±{stats.std:.3f}"


# ---------------------------------------------------------------------------
# DTW result records and the correlation pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DtwRow:
    """One original/synthesized pair's warp summary, as persisted by `dtw`."""

    utterance_id: str
    speaker_id: str
    pair_id: str
    cost: float
    path_length: int
    normalized_cost: float


def write_dtw_rows(rows: list[DtwRow]) -> str:
    lines = []
    for r in rows:
        lines.append(
            json.dumps(
                {
                    "kind": "dtw",
                    "utt": r.utterance_id,
                    "speaker": r.speaker_id,
                    "pair_id": r.pair_id,
                    "cost": r.cost,
                    "path_length": r.path_length,
                    "normalized_cost": r.normalized_cost,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n" if lines else ""


def read_dtw_rows(text: str) -> list[DtwRow]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
            if obj.get("kind") != "dtw":
                raise ValueError(f"unexpected record kind {obj.get('kind')!r}")
            rows.append(
                DtwRow(
                    utterance_id=obj["utt"],
                    speaker_id=obj["speaker"],
                    pair_id=obj["pair_id"],
                    cost=float(obj["cost"]),
                    path_length=int(obj["path_length"]),
                    normalized_cost=float(obj["normalized_cost"]),
                )
            )
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise ToolkitError(f"bad dtw record on line {lineno}: {exc}") from None
    return rows


def correlate_corpus(
    manifest: CorpusManifest,
    rows: list[DtwRow],
    score_name: str,
    per_speaker: bool = True,
    use_normalized: bool = True,
) -> tuple[PairedSeries, float]:
    """Join warp costs with proficiency scores and return (series, PCC).

    per_speaker pairs each speaker's mean cost with that speaker's score;
    otherwise every utterance's cost is paired with its speaker's score.
    """
    if not rows:
        raise MetricError("no warp results to correlate")
    speakers = manifest.speaker_map()

    def score_of(speaker_id: str) -> float:
        record = speakers.get(speaker_id)
        if record is None or score_name not in record.scores:
            raise MetricError(f"speaker {speaker_id!r} has no score {score_name!r}")
        return record.scores[score_name]

    cost_of = (lambda r: r.normalized_cost) if use_normalized else (lambda r: r.cost)
    series = PairedSeries()
    if per_speaker:
        means = per_speaker_mean((r.speaker_id, cost_of(r)) for r in rows)
        for speaker_id, mean_cost in means.items():
            series.labels.append(speaker_id)
            series.xs.append(mean_cost)
            series.ys.append(score_of(speaker_id))
    else:
        for r in rows:
            series.labels.append(r.utterance_id)
            series.xs.append(cost_of(r))
            series.ys.append(score_of(r.speaker_id))
    return series, pearson(series)
