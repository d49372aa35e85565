"""Evaluation toolkit for synthesized golden speech.

Measures how well synthesized speech serves pronunciation assessment:
intelligibility (WER/WERR), speaker similarity (SECS), naturalness
aggregation (MOS), warp-cost correlation with proficiency scores, and a
desk-scale lab for original/synthesized feature-fusion mechanisms with
gradient verification.
"""

__version__ = "0.1.0"
