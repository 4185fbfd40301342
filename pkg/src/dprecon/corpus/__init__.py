"""Synthetic corpora, corpus statistics and evaluation metrics."""

from .bleu import BleuResult, SignTestResult, bleu, corpus_bleu, sentence_bleu, sign_test
from .rng import XorShift64Star, splitmix64
from .stats import CorpusStats, dp_rate_stats, dropped_pronoun_recall
from .synth import SynthGrammar, SynthPair, drop_log, synth_corpus

__all__ = [
    "BleuResult",
    "SignTestResult",
    "bleu",
    "corpus_bleu",
    "sentence_bleu",
    "sign_test",
    "XorShift64Star",
    "splitmix64",
    "CorpusStats",
    "dp_rate_stats",
    "dropped_pronoun_recall",
    "SynthGrammar",
    "SynthPair",
    "drop_log",
    "synth_corpus",
]
