"""Corpus statistics: sizes, pronoun counts and the dropped-pronoun rate."""

from collections import Counter
from dataclasses import dataclass


@dataclass(frozen=True)
class CorpusStats:
    sentences: int
    src_words: int
    tgt_words: int
    src_pronouns: int
    tgt_pronouns: int
    src_vocab: int
    tgt_vocab: int
    src_avg_len: float
    tgt_avg_len: float
    insertions: int
    dp_rate: float
    no_target_pronouns: bool

    def records(self):
        """``key=value`` lines, one statistic per line."""
        out = []
        for k, v in self.__dict__.items():
            if isinstance(v, bool):
                v = int(v)
            elif isinstance(v, float):
                v = f"{v:.6f}"
            out.append(f"{k}={v}")
        return out

    def table(self):
        rows = [
            ("|S|", f"{self.sentences}", ""),
            ("|W|", f"{self.src_words}", f"{self.tgt_words}"),
            ("|P|", f"{self.src_pronouns}", f"{self.tgt_pronouns}"),
            ("|V|", f"{self.src_vocab}", f"{self.tgt_vocab}"),
            ("|L|", f"{self.src_avg_len:.2f}", f"{self.tgt_avg_len:.2f}"),
            ("DPs", f"{self.insertions}", ""),
            ("DP rate", f"{100 * self.dp_rate:.2f}%" + (" (no target pronouns)" if self.no_target_pronouns else ""), ""),
        ]
        lines = [f"{'':10}{'source':>12}{'target':>12}"]
        lines += [f"{name:10}{a:>12}{b:>12}" for name, a, b in rows]
        return "\n".join(lines)


def dp_rate_stats(labelled, targets, source_pronouns, target_pronouns):
    """Statistics over labelled source sentences and their targets.

    Source-side counts are taken on the labelled sentences (``x_hat``); the
    DP rate is inserted pronouns over target-side pronouns.
    """
    if len(labelled) != len(targets):
        raise ValueError(f"{len(labelled)} labelled sentences for {len(targets)} targets")
    src_p = set(source_pronouns)
    tgt_p = {t.casefold() for t in target_pronouns}
    src_words = tgt_words = sp = tp = ins = 0
    src_types, tgt_types = set(), set()
    for sent, y in zip(labelled, targets):
        toks = sent.tokens
        src_words += len(toks)
        tgt_words += len(y)
        sp += sum(t in src_p for t in toks)
        tp += sum(t.casefold() in tgt_p for t in y)
        ins += len(sent.insertions)
        src_types.update(toks)
        tgt_types.update(y)
    n = len(labelled)
    return CorpusStats(
        sentences=n,
        src_words=src_words,
        tgt_words=tgt_words,
        src_pronouns=sp,
        tgt_pronouns=tp,
        src_vocab=len(src_types),
        tgt_vocab=len(tgt_types),
        src_avg_len=src_words / n if n else 0.0,
        tgt_avg_len=tgt_words / n if n else 0.0,
        insertions=ins,
        dp_rate=ins / tp if tp else 0.0,
        no_target_pronouns=tp == 0,
    )


def dropped_pronoun_recall(hypotheses, references, dropped, target_pronouns):
    """Share of dropped-pronoun target tokens that the hypotheses produce.

    ``dropped[n]`` lists the target indices in ``references[n]`` whose source
    pronoun was dropped.  Hypothesis occurrences of a pronoun are credited to
    the reference's non-dropped occurrences first and only the remainder, up
    to the number of dropped occurrences, counts as recalled.  Returns
    ``(recalled, total)``.
    """
    if not len(hypotheses) == len(references) == len(dropped):
        raise ValueError("hypotheses, references and drop lists differ in length")
    pron = {t.casefold() for t in target_pronouns}
    recalled = total = 0
    for hyp, ref, idx in zip(hypotheses, references, dropped):
        if not idx:
            continue
        drop_counts = Counter(ref[j].casefold() for j in idx)
        ref_counts = Counter(t.casefold() for t in ref if t.casefold() in pron)
        hyp_counts = Counter(t.casefold() for t in hyp)
        for w, d in drop_counts.items():
            kept = ref_counts[w] - d
            recalled += min(max(hyp_counts[w] - kept, 0), d)
            total += d
    return recalled, total
