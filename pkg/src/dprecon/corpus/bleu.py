"""Case-insensitive corpus BLEU-4 and a sentence-level sign test.

Input is pre-tokenized; the only normalisation is ``str.casefold``.
"""

import math
from collections import Counter
from dataclasses import dataclass

MAX_N = 4


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _fold(sentence):
    return [t.casefold() for t in sentence]


def ngram_stats(candidate, reference):
    """``(cand_len, ref_len, [(matches_n, total_n) for n in 1..4])`` for one pair."""
    c, r = _fold(candidate), _fold(reference)
    counts = []
    for n in range(1, MAX_N + 1):
        cn, rn = _ngrams(c, n), _ngrams(r, n)
        counts.append((sum(min(k, rn[g]) for g, k in cn.items()), max(len(c) - n + 1, 0)))
    return len(c), len(r), counts


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple
    matches: tuple
    totals: tuple
    brevity_penalty: float
    cand_len: int
    ref_len: int

    def line(self):
        counts = " ".join(f"{m}/{t}" for m, t in zip(self.matches, self.totals))
        return (f"BLEU={self.score:.2f} BP={self.brevity_penalty:.4f} "
                f"len={self.cand_len}/{self.ref_len} ngrams={counts}")


def _combine(cand_len, ref_len, matches, totals, smooth=False):
    """``(score, brevity_penalty)`` from aggregated n-gram counts."""
    if cand_len == 0:
        return 0.0, 0.0
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    logs = []
    for n, (m, t) in enumerate(zip(matches, totals), start=1):
        if smooth and n > 1:
            m, t = m + 1, t + 1
        if t == 0:
            # no n-grams of this order exist in the candidates; the order is skipped
            continue
        if m == 0:
            return 0.0, bp
        logs.append(math.log(m / t))
    return 100.0 * bp * math.exp(sum(logs) / len(logs)), bp


def corpus_bleu(candidates, references):
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates for {len(references)} references")
    if not candidates:
        raise ValueError("empty candidate set")
    cl = rl = 0
    matches, totals = [0] * MAX_N, [0] * MAX_N
    for cand, ref in zip(candidates, references):
        c, r, counts = ngram_stats(cand, ref)
        cl += c
        rl += r
        for k, (m, t) in enumerate(counts):
            matches[k] += m
            totals[k] += t
    score, bp = _combine(cl, rl, matches, totals)
    precisions = tuple(m / t if t else 0.0 for m, t in zip(matches, totals))
    return BleuResult(score, precisions, tuple(matches), tuple(totals), bp, cl, rl)


def bleu(candidates, references):
    """Corpus BLEU-4 in [0, 100]."""
    return corpus_bleu(candidates, references).score


def sentence_bleu(candidate, reference):
    """Sentence BLEU with add-one smoothing on the 2..4-gram precisions."""
    c, r, counts = ngram_stats(candidate, reference)
    return _combine(c, r, [m for m, _ in counts], [t for _, t in counts], smooth=True)[0]


@dataclass(frozen=True)
class SignTestResult:
    wins: int
    losses: int
    ties: int
    p_value: float
    all_ties: bool

    def line(self):
        return (f"wins={self.wins} losses={self.losses} ties={self.ties} "
                f"p={self.p_value:.4g} all_ties={int(self.all_ties)}")


def binomial_two_sided(k, n):
    """Exact two-sided sign-test p-value for ``k`` successes of ``n``, capped at 1."""
    if n == 0:
        return 1.0
    tail = min(k, n - k)
    p = 2.0 * sum(math.comb(n, i) for i in range(tail + 1)) / 2.0 ** n
    return min(1.0, p)


def sign_test(outputs_a, outputs_b, references):
    """Per-sentence win/loss of system A over B by smoothed sentence BLEU."""
    if not len(outputs_a) == len(outputs_b) == len(references):
        raise ValueError("outputs and references must have equal line counts")
    wins = losses = 0
    for a, b, r in zip(outputs_a, outputs_b, references):
        sa, sb = sentence_bleu(a, r), sentence_bleu(b, r)
        if sa > sb:
            wins += 1
        elif sb > sa:
            losses += 1
    ties = len(references) - wins - losses
    n = wins + losses
    return SignTestResult(wins, losses, ties, binomial_two_sided(wins, n), n == 0)
