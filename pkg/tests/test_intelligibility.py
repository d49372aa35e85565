"""Tokenization, edit-distance alignment, WER and WERR."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goldenbench.corpus import Role, parse_manifest
from goldenbench.errors import MetricError
from goldenbench.intelligibility import (
    AlignmentCounts,
    NormalizationPolicy,
    align_tokens,
    corpus_wer,
    normalize_tokens,
    wer,
    werr,
)

from conftest import spk_line, utt_line


def edit_distance_bruteforce(reference, hypothesis):
    """Minimum edit distance by plain recursion over all alignments.

    Independent of the DP in align_tokens: no memoization, no shared code.
    Only usable for short inputs.
    """

    def best(i, j):
        if i == len(reference):
            return len(hypothesis) - j
        if j == len(hypothesis):
            return len(reference) - i
        sub = best(i + 1, j + 1) + (reference[i] != hypothesis[j])
        ins = best(i, j + 1) + 1
        dele = best(i + 1, j) + 1
        return min(sub, ins, dele)

    return best(0, 0)


class TestNormalize:
    def test_policy_definition(self):
        assert normalize_tokens("The cat, sat.") == ["the", "cat", "sat"]

    def test_empty(self):
        assert normalize_tokens("") == []

    def test_whitespace_collapse(self):
        assert normalize_tokens("  a   b ") == ["a", "b"]

    def test_apostrophe_kept(self):
        assert normalize_tokens("Don't stop!") == ["don't", "stop"]

    def test_flags_independent(self):
        policy = NormalizationPolicy(lowercase=False, strip_punctuation=False)
        assert normalize_tokens("The cat, sat.", policy) == ["The", "cat,", "sat."]

    @given(st.text(max_size=60))
    @settings(max_examples=100, deadline=None)
    def test_idempotent_and_nonempty_tokens(self, text):
        tokens = normalize_tokens(text)
        assert all(tokens)
        again = normalize_tokens(" ".join(tokens))
        assert again == tokens


class TestAlignTokens:
    def test_identity(self):
        counts = align_tokens(["the", "cat", "sat"], ["the", "cat", "sat"])
        assert (counts.substitutions, counts.deletions, counts.insertions) == (0, 0, 0)
        assert counts.reference_length == 3

    def test_substitution_plus_insertion(self):
        # Oracle-verified: minimum distance over all alignments is 2.
        ref = ["the", "cat", "sat"]
        hyp = ["the", "bat", "sat", "down"]
        assert edit_distance_bruteforce(ref, hyp) == 2
        counts = align_tokens(ref, hyp)
        assert (counts.substitutions, counts.deletions, counts.insertions) == (1, 0, 1)

    def test_empty_hypothesis(self):
        counts = align_tokens(["a", "b"], [])
        assert (counts.substitutions, counts.deletions, counts.insertions) == (0, 2, 0)

    def test_empty_reference(self):
        counts = align_tokens([], ["a", "b"])
        assert counts.insertions == 2
        assert counts.reference_length == 0

    def test_tie_break_prefers_substitution(self):
        # Both (S=2) and (D=1, I=1) reach the optimum of 2; the backtrace
        # must settle on substitutions.
        counts = align_tokens(["a", "b"], ["b", "a"])
        assert (counts.substitutions, counts.deletions, counts.insertions) == (2, 0, 0)

    def test_matches_bruteforce_on_random_instances(self):
        rng = np.random.default_rng(7)
        alphabet = ["a", "b", "c"]
        for _ in range(300):
            ref = [alphabet[i] for i in rng.integers(0, 3, size=rng.integers(0, 7))]
            hyp = [alphabet[i] for i in rng.integers(0, 3, size=rng.integers(0, 7))]
            counts = align_tokens(ref, hyp)
            assert counts.total_errors == edit_distance_bruteforce(ref, hyp)
            assert counts.total_errors <= max(len(ref), len(hyp))
            assert counts.substitutions + counts.deletions <= len(ref)

    def test_self_alignment_zero_for_random_lists(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            tokens = [str(i) for i in rng.integers(0, 5, size=rng.integers(0, 10))]
            assert align_tokens(tokens, tokens).total_errors == 0

    def test_counts_invariants_enforced(self):
        with pytest.raises(ValueError):
            AlignmentCounts(2, 2, 0, 3)
        with pytest.raises(ValueError):
            AlignmentCounts(-1, 0, 0, 3)


class TestWer:
    def test_perfect(self):
        assert wer(AlignmentCounts(0, 0, 0, 3)) == 0.0

    def test_two_thirds(self):
        assert wer(AlignmentCounts(1, 0, 1, 3)) == pytest.approx(0.6667, abs=1e-4)

    def test_empty_hypothesis_is_one(self):
        assert wer(AlignmentCounts(0, 2, 0, 2)) == 1.0

    def test_may_exceed_one(self):
        assert wer(AlignmentCounts(0, 0, 5, 2)) == 2.5

    def test_empty_reference_rejected(self):
        with pytest.raises(MetricError, match="N = 0"):
            wer(AlignmentCounts(0, 0, 0, 0))


class TestWerr:
    @pytest.mark.parametrize(
        "baseline,system,expected",
        [
            (7.42, 4.84, 34.77),
            (7.42, 5.03, 32.21),
            (21.07, 4.32, 79.50),
            (21.07, 4.63, 78.03),
            (25.02, 15.95, 36.25),
            (25.02, 16.47, 34.17),
        ],
    )
    def test_published_reduction_arithmetic(self, baseline, system, expected):
        assert werr(baseline, system) == pytest.approx(expected, abs=0.01)

    def test_no_change_is_zero(self):
        for x in (0.01, 0.5, 7.42, 99.0):
            assert werr(x, x) == 0.0

    def test_antitone_in_system_wer(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            baseline = float(rng.uniform(0.5, 50))
            lo, hi = sorted(rng.uniform(0, 60, size=2))
            assert werr(baseline, lo) >= werr(baseline, hi)

    def test_nonpositive_baseline_rejected(self):
        with pytest.raises(MetricError):
            werr(0.0, 1.0)
        with pytest.raises(MetricError):
            werr(-1.0, 1.0)


def _corpus(lines):
    return parse_manifest("\n".join(lines))


class TestCorpusWer:
    def test_pooled_hand_value(self):
        # (1 error / N=4) and (1 error / N=6) pool to 2/10.
        manifest = _corpus(
            [
                spk_line("s1"),
                utt_line("u1", prompt="a b c d", hyp="a b c x"),
                utt_line("u2", pair_id="p2", prompt="a b c d e f", hyp="a b c d e x"),
            ]
        )
        assert corpus_wer(manifest, Role.ORIGINAL) == pytest.approx(0.2)

    def test_macro_differs_from_pooled(self):
        manifest = _corpus(
            [
                spk_line("s1"),
                utt_line("u1", prompt="a b c d", hyp="a b c x"),
                utt_line("u2", pair_id="p2", prompt="a b c d e f", hyp="a b c d e x"),
            ]
        )
        macro = corpus_wer(manifest, Role.ORIGINAL, macro=True)
        assert macro == pytest.approx((0.25 + 1 / 6) / 2)

    def test_perfect_hypotheses(self):
        manifest = _corpus(
            [
                spk_line("s1"),
                utt_line("u1", hyp="the cat sat"),
                utt_line("u2", pair_id="p2", hyp="the cat sat"),
            ]
        )
        assert corpus_wer(manifest, Role.ORIGINAL) == 0.0

    def test_role_without_utterances_rejected(self):
        manifest = _corpus([spk_line("s1"), utt_line("u1", hyp="x")])
        with pytest.raises(MetricError, match="golden"):
            corpus_wer(manifest, Role.GOLDEN)

    def test_missing_hypothesis_names_utterance(self):
        manifest = _corpus([spk_line("s1"), utt_line("u1")])
        with pytest.raises(MetricError, match="u1"):
            corpus_wer(manifest, Role.ORIGINAL)
