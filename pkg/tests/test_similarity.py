"""Cosine similarity and the SECS corpus metrics."""

import math

import numpy as np
import pytest

from goldenbench.corpus import EmbeddingSequence, parse_manifest, Role
from goldenbench.errors import MetricError
from goldenbench.similarity import (
    SpeakerEmbeddingSet,
    collect_embedding_sets,
    cosine,
    secs_report,
    secs_spk,
    secs_utt,
)

from conftest import spk_line, utt_line


class TestCosine:
    def test_self_similarity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = rng.standard_normal(8)
            assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_hand_value(self):
        # 32 / (sqrt(14) * sqrt(77)), worked out from the definition.
        expected = 32.0 / (math.sqrt(14.0) * math.sqrt(77.0))
        assert cosine([1, 2, 3], [4, 5, 6]) == pytest.approx(expected, abs=1e-12)
        assert cosine([1, 2, 3], [4, 5, 6]) == pytest.approx(0.974632, abs=1e-6)

    def test_dim_mismatch(self):
        with pytest.raises(MetricError, match="dim"):
            cosine([1, 0], [1, 0, 0])

    def test_zero_norm(self):
        with pytest.raises(MetricError, match="zero-norm"):
            cosine([0.0, 0.0], [1.0, 0.0])


def _set(sid, original, synthesized):
    return SpeakerEmbeddingSet(
        speaker_id=sid,
        original=[np.asarray(v, dtype=float) for v in original],
        synthesized=[np.asarray(v, dtype=float) for v in synthesized],
    )


class TestSecsUtt:
    def test_identical_pairs_give_exactly_one(self):
        rng = np.random.default_rng(1)
        sets = []
        for i in range(3):
            orig = [rng.standard_normal(4) for _ in range(3)]
            sets.append(_set(f"s{i}", orig, [v.copy() for v in orig]))
        assert secs_utt(sets) == pytest.approx(1.0, abs=1e-12)

    def test_hand_value(self):
        # Speaker 1 pair cosines {1.0, 0.5}; speaker 2 pair cosine {0.0}:
        # (0.75 + 0.0) / 2 = 0.375.
        s1 = _set("s1", [[1, 0], [1, 0]], [[1, 0], [1, math.sqrt(3)]])
        s2 = _set("s2", [[1, 0]], [[0, 1]])
        assert secs_utt([s1, s2]) == pytest.approx(0.375, abs=1e-12)

    def test_orthogonal_pairs_give_zero(self):
        s = _set("s1", [[1, 0], [0, 1]], [[0, 1], [1, 0]])
        assert secs_utt([s]) == pytest.approx(0.0, abs=1e-12)

    def test_length_mismatch_names_speaker(self):
        s = _set("spkr7", [[1, 0], [0, 1]], [[1, 0]])
        with pytest.raises(MetricError, match="spkr7"):
            secs_utt([s])

    def test_empty_set_list_rejected(self):
        with pytest.raises(MetricError):
            secs_utt([])


class TestSecsSpk:
    def test_single_self_pair(self):
        sets = [_set("s1", [[1, 2]], [[1, 2]]), _set("s2", [[0, 3]], [[0, 3]])]
        assert secs_spk(sets) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_grid(self):
        # All four pairs of e1=(1,0), e2=(0,1) against themselves:
        # (1 + 0 + 0 + 1) / 4 = 0.5.
        s = _set("s1", [[1, 0], [0, 1]], [[1, 0], [0, 1]])
        assert secs_spk([s]) == pytest.approx(0.5, abs=1e-12)

    def test_original_vs_original_below_one(self):
        # (1 + 0.6 + 0.6 + 1) / 4 = 0.8; cross-utterance terms pull the
        # self-comparison below 1 on multi-utterance speakers.
        s = _set("s1", [[1, 0], [0.6, 0.8]], [[1, 0], [0.6, 0.8]])
        assert secs_spk([s]) == pytest.approx(0.8, abs=1e-12)

    def test_exclude_diagonal(self):
        s = _set("s1", [[1, 0], [0.6, 0.8]], [[1, 0], [0.6, 0.8]])
        assert secs_spk([s], exclude_diagonal=True) == pytest.approx(0.6, abs=1e-12)

    def test_exclude_diagonal_needs_two_utterances(self):
        with pytest.raises(MetricError, match=">= 2"):
            secs_spk([_set("s1", [[1, 0]], [[1, 0]])], exclude_diagonal=True)

    def test_unequal_lists_normalize_by_grid(self):
        s = _set("s1", [[1, 0]], [[1, 0], [0, 1]])
        assert secs_spk([s]) == pytest.approx(0.5, abs=1e-12)


class TestProperties:
    def _random_sets(self, rng, speakers=4, utts=3, dim=6):
        sets = []
        for i in range(speakers):
            orig = [rng.standard_normal(dim) for _ in range(utts)]
            syn = [rng.standard_normal(dim) for _ in range(utts)]
            sets.append(_set(f"s{i}", orig, syn))
        return sets

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        sets = self._random_sets(rng)
        base_utt, base_spk = secs_utt(sets), secs_spk(sets)
        for s in sets:
            s.original = [v * float(rng.uniform(0.1, 10)) for v in s.original]
            s.synthesized = [v * float(rng.uniform(0.1, 10)) for v in s.synthesized]
        assert secs_utt(sets) == pytest.approx(base_utt, abs=1e-12)
        assert secs_spk(sets) == pytest.approx(base_spk, abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            sets = self._random_sets(rng)
            assert -1.0 <= secs_utt(sets) <= 1.0
            assert -1.0 <= secs_spk(sets) <= 1.0

    def test_single_utterance_reduction(self):
        rng = np.random.default_rng(8)
        sets = self._random_sets(rng, utts=1)
        assert secs_utt(sets) == pytest.approx(secs_spk(sets), abs=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(9)
        sets = self._random_sets(rng)
        base_utt, base_spk = secs_utt(sets), secs_spk(sets)

        shuffled_speakers = list(reversed(sets))
        assert secs_utt(shuffled_speakers) == pytest.approx(base_utt, abs=1e-12)
        assert secs_spk(shuffled_speakers) == pytest.approx(base_spk, abs=1e-12)

        # Lockstep reorder within a speaker keeps the paired metric.
        perm = rng.permutation(len(sets[0].original))
        sets[0].original = [sets[0].original[i] for i in perm]
        sets[0].synthesized = [sets[0].synthesized[i] for i in perm]
        assert secs_utt(sets) == pytest.approx(base_utt, abs=1e-12)
        assert secs_spk(sets) == pytest.approx(base_spk, abs=1e-12)

    def test_report_consistency(self):
        rng = np.random.default_rng(10)
        sets = self._random_sets(rng)
        report = secs_report(sets)
        assert report.corpus_utt == pytest.approx(secs_utt(sets), abs=1e-15)
        assert report.corpus_spk == pytest.approx(secs_spk(sets), abs=1e-15)
        assert set(report.per_speaker_utt) == {s.speaker_id for s in sets}


class TestCollect:
    def test_pairs_roles_by_pair_id(self):
        manifest = parse_manifest(
            "\n".join(
                [
                    spk_line("s1"),
                    utt_line("o1", pair_id="p1", spk_emb="o1.gseb"),
                    utt_line("o2", pair_id="p2", spk_emb="o2.gseb"),
                    utt_line("g1", role="golden", pair_id="p1", spk_emb="g1.gseb"),
                    utt_line("g2", role="golden", pair_id="p2", spk_emb="g2.gseb"),
                ]
            )
        )
        vectors = {
            "o1.gseb": [1.0, 0.0],
            "o2.gseb": [0.0, 1.0],
            "g1.gseb": [1.0, 0.0],
            "g2.gseb": [0.0, -1.0],
        }

        def reader(path):
            return EmbeddingSequence(np.array([vectors[path]], dtype=np.float32))

        sets = collect_embedding_sets(manifest, reader, Role.GOLDEN)
        assert len(sets) == 1
        assert secs_utt(sets) == pytest.approx(0.0, abs=1e-12)  # (1 + -1) / 2

    def test_original_role_compares_to_itself(self):
        manifest = parse_manifest(
            "\n".join([spk_line("s1"), utt_line("o1", spk_emb="o1.gseb")])
        )
        reader = lambda path: EmbeddingSequence(np.array([[3.0, 4.0]], dtype=np.float32))
        sets = collect_embedding_sets(manifest, reader, Role.ORIGINAL)
        assert secs_utt(sets) == pytest.approx(1.0, abs=1e-12)

    def test_multiframe_speaker_embedding_rejected(self):
        manifest = parse_manifest(
            "\n".join([spk_line("s1"), utt_line("o1", spk_emb="o1.gseb")])
        )
        reader = lambda path: EmbeddingSequence(np.ones((3, 2), dtype=np.float32))
        with pytest.raises(MetricError, match="frame_count=1"):
            collect_embedding_sets(manifest, reader, Role.ORIGINAL)
