"""Dynamic-time-warping engine for frame-embedding sequences.

Costs accumulate over monotone paths with steps (1,0), (0,1), (1,1); the
dynamic program runs in 64-bit with two-row memory unless a path is
requested.  Tie-breaking on materialized paths prefers the diagonal step,
then advancing the first sequence, then the second, so path_length and
the path itself are reproducible.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .corpus import EmbeddingSequence
from .errors import MetricError, ToolkitError


class LocalMetric(str, Enum):
    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "squared_euclidean"
    COSINE_DISTANCE = "cosine_distance"


@dataclass(frozen=True)
class DtwConfig:
    local_metric: LocalMetric = LocalMetric.EUCLIDEAN
    normalize_by_path_length: bool = True
    band_radius: int | None = None

    def __post_init__(self):
        if self.band_radius is not None and self.band_radius < 1:
            raise ValueError("band_radius must be >= 1 when set")


@dataclass(frozen=True)
class DtwResult:
    cost: float
    path_length: int
    normalized_cost: float
    path: tuple[tuple[int, int], ...] | None = None


def local_cost(a: np.ndarray, b: np.ndarray, metric: LocalMetric) -> float:
    """Pointwise distance between two frame vectors."""
    av = np.asarray(a, dtype=np.float64).ravel()
    bv = np.asarray(b, dtype=np.float64).ravel()
    if av.shape != bv.shape:
        raise MetricError(f"dim mismatch: {av.shape[0]} vs {bv.shape[0]}")
    if metric is LocalMetric.EUCLIDEAN:
        return float(np.linalg.norm(av - bv))
    if metric is LocalMetric.SQUARED_EUCLIDEAN:
        return float(np.dot(av - bv, av - bv))
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        raise MetricError("cosine distance is undefined for a zero-norm vector")
    return float(1.0 - np.dot(av, bv) / (na * nb))


def _cost_matrix(a: np.ndarray, b: np.ndarray, metric: LocalMetric) -> np.ndarray:
    """Pairwise local costs, (T_a, T_b), in 64-bit."""
    if metric is LocalMetric.COSINE_DISTANCE:
        norms_a = np.linalg.norm(a, axis=1)
        norms_b = np.linalg.norm(b, axis=1)
        if np.any(norms_a == 0.0) or np.any(norms_b == 0.0):
            raise MetricError("cosine distance is undefined for a zero-norm frame")
        return 1.0 - (a @ b.T) / np.outer(norms_a, norms_b)
    diff_sq = (
        np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
    )
    np.maximum(diff_sq, 0.0, out=diff_sq)
    if metric is LocalMetric.SQUARED_EUCLIDEAN:
        return diff_sq
    return np.sqrt(diff_sq)


def dtw_cost(
    A: EmbeddingSequence,
    B: EmbeddingSequence,
    config: DtwConfig = DtwConfig(),
    return_path: bool = False,
) -> DtwResult:
    """Minimum accumulated local cost over all monotone alignments of A and B."""
    if A.dim != B.dim:
        raise MetricError(f"dim mismatch: {A.dim} vs {B.dim}")
    ta, tb = A.frame_count, B.frame_count
    band = config.band_radius
    if band is not None and abs(ta - tb) > band:
        raise MetricError(
            f"band radius {band} is infeasible for lengths {ta} and {tb} "
            f"(|T_a - T_b| = {abs(ta - tb)})"
        )
    a = A.as_float64()
    b = B.as_float64()
    costs = _cost_matrix(a, b, config.local_metric)

    if return_path:
        return _dtw_full(costs, band, config)
    return _dtw_two_row(costs, band, config)


def _in_band(i: int, j: int, band: int | None) -> bool:
    return band is None or abs(i - j) <= band


def _dtw_two_row(costs: np.ndarray, band: int | None, config: DtwConfig) -> DtwResult:
    ta, tb = costs.shape
    inf = np.inf
    # Each cell carries (accumulated cost, path length under tie-breaking).
    prev_cost = np.full(tb, inf)
    prev_len = np.zeros(tb, dtype=np.int64)
    cur_cost = np.full(tb, inf)
    cur_len = np.zeros(tb, dtype=np.int64)

    for i in range(ta):
        cur_cost.fill(inf)
        for j in range(tb):
            if not _in_band(i, j, band):
                continue
            c = costs[i, j]
            if i == 0 and j == 0:
                cur_cost[j] = c
                cur_len[j] = 1
                continue
            # Tie-break order: diagonal, then advance A, then advance B.
            best = inf
            best_len = 0
            if i > 0 and j > 0 and prev_cost[j - 1] < inf:
                best = prev_cost[j - 1]
                best_len = prev_len[j - 1]
            if i > 0 and prev_cost[j] < best:
                best = prev_cost[j]
                best_len = prev_len[j]
            if j > 0 and cur_cost[j - 1] < best:
                best = cur_cost[j - 1]
                best_len = cur_len[j - 1]
            if best == inf:
                continue
            cur_cost[j] = best + c
            cur_len[j] = best_len + 1
        prev_cost, cur_cost = cur_cost, prev_cost
        prev_len, cur_len = cur_len, prev_len

    total = float(prev_cost[tb - 1])
    if not np.isfinite(total):
        raise MetricError("no feasible alignment path within the band")
    length = int(prev_len[tb - 1])
    return DtwResult(cost=total, path_length=length, normalized_cost=total / length)


def _dtw_full(costs: np.ndarray, band: int | None, config: DtwConfig) -> DtwResult:
    ta, tb = costs.shape
    inf = np.inf
    acc = np.full((ta, tb), inf)
    # Predecessor actually chosen under the tie-break, so the backtrace
    # replays forward decisions instead of re-deriving them from floats.
    step = np.zeros((ta, tb), dtype=np.uint8)  # 1=diagonal, 2=advance A, 3=advance B
    for i in range(ta):
        for j in range(tb):
            if not _in_band(i, j, band):
                continue
            c = costs[i, j]
            if i == 0 and j == 0:
                acc[0, 0] = c
                continue
            best = inf
            chosen = 0
            if i > 0 and j > 0 and acc[i - 1, j - 1] < inf:
                best = acc[i - 1, j - 1]
                chosen = 1
            if i > 0 and acc[i - 1, j] < best:
                best = acc[i - 1, j]
                chosen = 2
            if j > 0 and acc[i, j - 1] < best:
                best = acc[i, j - 1]
                chosen = 3
            if chosen:
                acc[i, j] = best + c
                step[i, j] = chosen

    total = float(acc[ta - 1, tb - 1])
    if not np.isfinite(total):
        raise MetricError("no feasible alignment path within the band")

    path = [(ta - 1, tb - 1)]
    i, j = ta - 1, tb - 1
    while i > 0 or j > 0:
        chosen = step[i, j]
        if chosen == 1:
            i, j = i - 1, j - 1
        elif chosen == 2:
            i -= 1
        else:
            j -= 1
        path.append((i, j))
    path.reverse()
    length = len(path)
    return DtwResult(
        cost=total,
        path_length=length,
        normalized_cost=total / length,
        path=tuple(path),
    )


class BatchDtwError(ToolkitError):
    """Raised when at least one pair in a batch fails.

    results holds a DtwResult per input index, None at failed slots, so
    callers can still use whatever was computable.
    """

    def __init__(self, index: int, cause: Exception, results: list[DtwResult | None]):
        self.index = index
        self.cause = cause
        self.results = results
        super().__init__(f"pair {index}: {cause}")


def batch_dtw(
    pairs: list[tuple[EmbeddingSequence, EmbeddingSequence]],
    config: DtwConfig = DtwConfig(),
    workers: int = 1,
    return_paths: bool = False,
) -> list[DtwResult]:
    """dtw_cost over independent pairs; output order matches input order.

    Results are identical for any worker count.  Workers are threads: the
    dynamic program holds the interpreter lock, so this mainly overlaps
    the numpy cost-matrix work, but the contract is determinism, not
    speedup.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if not pairs:
        return []

    def run(pair: tuple[EmbeddingSequence, EmbeddingSequence]) -> DtwResult:
        return dtw_cost(pair[0], pair[1], config, return_path=return_paths)

    outcomes: list[DtwResult | None] = [None] * len(pairs)
    failures: list[tuple[int, Exception]] = []
    if workers == 1:
        for idx, pair in enumerate(pairs):
            try:
                outcomes[idx] = run(pair)
            except ToolkitError as exc:
                failures.append((idx, exc))
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run, pair): idx for idx, pair in enumerate(pairs)}
            for fut, idx in futures.items():
                try:
                    outcomes[idx] = fut.result()
                except ToolkitError as exc:
                    failures.append((idx, exc))
    if failures:
        failures.sort(key=lambda f: f[0])
        raise BatchDtwError(failures[0][0], failures[0][1], outcomes)
    return outcomes  # type: ignore[return-value]


def zscore_sequences(sequences: list[EmbeddingSequence]) -> list[EmbeddingSequence]:
    """Standardize each dimension over all frames of all sequences.

    Zero-variance dimensions are left unscaled.  Changes DTW costs; off
    by default and exposed as a preprocessing option.
    """
    if not sequences:
        return []
    stacked = np.concatenate([s.as_float64() for s in sequences], axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std[std == 0.0] = 1.0
    return [EmbeddingSequence((s.as_float64() - mean) / std) for s in sequences]
