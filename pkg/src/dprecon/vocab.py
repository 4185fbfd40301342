"""Token/id vocabulary with fixed reserved entries."""

from collections import Counter

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<s>", "</s>"
RESERVED = (PAD, UNK, BOS, EOS)
PAD_ID, UNK_ID, BOS_ID, EOS_ID = 0, 1, 2, 3


class Vocabulary:
    """Bijective token <-> id map.

    Ids 0..3 are always ``<pad> <unk> <s> </s>``; corpus tokens follow in
    rank order.  Unknown tokens encode to ``UNK_ID``.
    """

    def __init__(self, tokens=()):
        self.itos = list(RESERVED)
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}
        for tok in tokens:
            if tok in self.stoi:
                raise ValueError(f"duplicate token {tok!r}")
            self.stoi[tok] = len(self.itos)
            self.itos.append(tok)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, tok):
        return tok in self.stoi

    def encode(self, tokens, add_eos=False):
        ids = [self.stoi.get(t, UNK_ID) for t in tokens]
        if add_eos:
            ids.append(EOS_ID)
        return ids

    def decode(self, ids, strip=True):
        out = []
        for i in ids:
            if strip and i == EOS_ID:
                break
            if strip and i in (PAD_ID, BOS_ID):
                continue
            out.append(self.itos[i])
        return out

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self.itos:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh]
        if tuple(tokens[:4]) != RESERVED:
            raise ValueError(f"{path}: vocabulary must start with {' '.join(RESERVED)}")
        return cls(tokens[4:])


def build_vocab(sentences, cap):
    """Keep the ``cap`` most frequent tokens; ties go to the earlier first occurrence.

    Returns ``(vocabulary, coverage)`` where coverage is the fraction of token
    occurrences that are in the vocabulary.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    counts = Counter()
    first = {}
    total = 0
    for sent in sentences:
        for tok in sent:
            counts[tok] += 1
            first.setdefault(tok, len(first))
            total += 1
    if total == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    ranked = sorted(counts, key=lambda t: (-counts[t], first[t]))
    ranked = [t for t in ranked if t not in RESERVED][:cap]
    kept = sum(counts[t] for t in ranked)
    return Vocabulary(ranked), kept / total
