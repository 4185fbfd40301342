"""IBM Model 1 word alignment trained with EM.

Translation tables are dense ``(|source| + 1) x |target|`` arrays (row 0 is
NULL), which is fine for desk-scale vocabularies of a few thousand types.
"""

import numpy as np

NULL = "<null>"


class Model1:
    """``t(target | source)`` with a NULL source word.

    ``history`` records, after every EM iteration, the maximum deviation of
    any row sum from 1.
    """

    def __init__(self, pairs, iterations=5):
        if not pairs:
            raise ValueError("cannot align an empty corpus")
        if iterations < 1:
            raise ValueError("iterations must be >= 1")
        self.src_ids = {NULL: 0}
        self.tgt_ids = {}
        enc = []
        for src, tgt in pairs:
            s = np.array([0] + [self.src_ids.setdefault(w, len(self.src_ids)) for w in src])
            t = np.array([self.tgt_ids.setdefault(w, len(self.tgt_ids)) for w in tgt], dtype=np.int64)
            enc.append((s, t))
        self._enc = enc
        self.table = np.full((len(self.src_ids), len(self.tgt_ids)), 1.0 / max(len(self.tgt_ids), 1))
        self.history = []
        for _ in range(iterations):
            self._em_step()

    def _em_step(self):
        counts = np.zeros_like(self.table)
        for s, t in self._enc:
            if t.size == 0:
                continue
            sub = self.table[np.ix_(s, t)]
            post = sub / sub.sum(axis=0, keepdims=True)
            np.add.at(counts, (s[:, None], t[None, :]), post)
        totals = counts.sum(axis=1, keepdims=True)
        # unseen rows keep their previous distribution
        seen = totals[:, 0] > 0
        self.table[seen] = counts[seen] / totals[seen]
        self.history.append(float(np.abs(self.table.sum(axis=1) - 1.0).max()))

    def prob(self, tgt_word, src_word):
        i = self.src_ids.get(src_word)
        j = self.tgt_ids.get(tgt_word)
        if i is None or j is None:
            return 0.0
        return float(self.table[i, j])

    def viterbi(self, src, tgt):
        """Per target word, the best source index (``None`` for NULL)."""
        s = np.array([0] + [self.src_ids.get(w, -1) for w in src])
        out = []
        for w in tgt:
            j = self.tgt_ids.get(w)
            if j is None:
                out.append(None)
                continue
            scores = np.where(s >= 0, self.table[np.maximum(s, 0), j], -1.0)
            best = int(np.argmax(scores))
            out.append(None if best == 0 else best - 1)
        return out


def em_align(pairs, iterations=5):
    """Symmetrised Model 1 alignment.

    Trains ``t(y|x)`` and ``t(x|y)``, takes per-word argmax links in each
    direction (NULL allowed) and keeps their intersection.  Returns
    ``(links, forward_model, reverse_model)`` where ``links[n]`` is a sorted
    list of ``(source index, target index)``.
    """
    pairs = [(list(x), list(y)) for x, y in pairs]
    fwd = Model1(pairs, iterations)
    rev = Model1([(y, x) for x, y in pairs], iterations)
    links = []
    for x, y in pairs:
        a = {(i, j) for j, i in enumerate(fwd.viterbi(x, y)) if i is not None}
        b = {(i, j) for i, j in enumerate(rev.viterbi(y, x)) if j is not None}
        links.append(sorted(a & b))
    return links, fwd, rev


def read_pharaoh(line):
    links = []
    for item in line.split():
        i, j = item.split("-")
        links.append((int(i), int(j)))
    return sorted(links)


def format_pharaoh(links):
    return " ".join(f"{i}-{j}" for i, j in sorted(links))
