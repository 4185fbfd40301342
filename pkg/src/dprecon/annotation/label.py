"""Projection of unaligned target pronouns into the source, and labelling F1."""

import logging
from dataclasses import dataclass, field

log = logging.getLogger(__name__)


@dataclass
class LabeledSentence:
    """A source sentence with pronouns inserted.

    ``insertions`` holds ``(gap, token, provenance)`` where ``gap`` is the
    position in the original ``x`` (0 = before the first token) and
    ``provenance`` the target index that triggered it (``None`` when it came
    from the monolingual generator).
    """

    x: list
    insertions: list = field(default_factory=list)

    @property
    def tokens(self):
        by_gap = {}
        for gap, tok, _ in self.insertions:
            by_gap.setdefault(gap, []).append(tok)
        out = []
        for i in range(len(self.x) + 1):
            out.extend(by_gap.get(i, ()))
            if i < len(self.x):
                out.append(self.x[i])
        return out

    def strip(self):
        """Remove the inserted tokens again (always equals ``x``)."""
        toks = self.tokens
        drop = set()
        pos = 0
        by_gap = {}
        for gap, _, _ in self.insertions:
            by_gap[gap] = by_gap.get(gap, 0) + 1
        for i in range(len(self.x) + 1):
            n = by_gap.get(i, 0)
            drop.update(range(pos, pos + n))
            pos += n + (1 if i < len(self.x) else 0)
        return [t for k, t in enumerate(toks) if k not in drop]

    def key_set(self):
        return {(gap, tok) for gap, tok, _ in self.insertions}


def read_lexicon(path):
    """Lexicon file lines: ``target_pronoun source_pronoun probability``."""
    lex = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tgt, src, p = line.split()
            lex.setdefault(tgt, []).append((src, float(p)))
    for entries in lex.values():
        entries.sort(key=lambda e: -e[1])
    return lex


def read_inventory(path):
    with open(path, encoding="utf-8") as fh:
        return [w for line in fh for w in line.split("#", 1)[0].split()]


def lexicon_from_alignments(pairs, links, source_pronouns, target_pronouns):
    """Estimate ``p(source pronoun | target pronoun)`` from aligned pronoun pairs."""
    src_set = set(source_pronouns)
    tgt_set = {t.lower() for t in target_pronouns}
    counts = {}
    for (x, y), lk in zip(pairs, links):
        for i, j in lk:
            t = y[j].lower()
            if t in tgt_set and x[i] in src_set:
                counts.setdefault(t, {}).setdefault(x[i], 0)
                counts[t][x[i]] += 1
    lex = {}
    for t, c in counts.items():
        total = sum(c.values())
        lex[t] = sorted(((s, n / total) for s, n in c.items()), key=lambda e: (-e[1], e[0]))
    return lex


def label_parallel(x, y, links, lexicon, target_pronouns):
    """Insert the source pronoun for every unaligned target pronoun.

    The insertion gap is one past the source word aligned to the closest
    preceding aligned target word (the rightmost such source word if there
    are several), or 0 when no earlier target word is aligned.
    """
    tgt_set = {t.lower() for t in target_pronouns}
    src_of = {}
    for i, j in links:
        if not (0 <= i < len(x) and 0 <= j < len(y)):
            raise ValueError(f"link {i}-{j} out of bounds for lengths {len(x)}/{len(y)}")
        src_of[j] = max(src_of.get(j, -1), i)
    insertions = []
    for j, word in enumerate(y):
        w = word.lower()
        if w not in tgt_set or j in src_of:
            continue
        entries = lexicon.get(w)
        if not entries:
            log.warning("target pronoun %r missing from lexicon; skipped", word)
            continue
        gap = 0
        for k in range(j - 1, -1, -1):
            if k in src_of:
                gap = src_of[k] + 1
                break
        insertions.append((gap, entries[0][0], j))
    return LabeledSentence(list(x), insertions)


def labelling_f1(predicted, gold):
    """Precision, recall and F1 of insertions matched on (gap, token).

    Precision is 0 when nothing is predicted; recall is 0 when there is no
    gold insertion; F1 is 0 whenever precision + recall is 0.
    """
    if len(predicted) != len(gold):
        raise ValueError(f"{len(predicted)} predictions for {len(gold)} gold sentences")
    correct = n_pred = n_gold = 0
    for p, g in zip(predicted, gold):
        pk = _multiset(p)
        gk = _multiset(g)
        n_pred += sum(pk.values())
        n_gold += sum(gk.values())
        correct += sum(min(c, gk.get(k, 0)) for k, c in pk.items())
    precision = correct / n_pred if n_pred else 0.0
    recall = correct / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _multiset(sent):
    out = {}
    for gap, tok, _ in sent.insertions:
        out[(gap, tok)] = out.get((gap, tok), 0) + 1
    return out
