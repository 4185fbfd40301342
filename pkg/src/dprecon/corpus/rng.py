"""Pinned pseudo-random generator for reproducible synthetic corpora.

State is one 64-bit word, seeded with SplitMix64 and advanced with
xorshift64* (Marsaglia shifts 12/25/27, multiplier 0x2545F4914F6CDD1D)::

    x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27      (mod 2**64)
    output = (x * 0x2545F4914F6CDD1D) mod 2**64

``random()`` uses the top 53 output bits; ``below(n)`` rejects the biased
tail so every residue is equally likely.  Any implementation of these
recurrences reproduces the same corpus.
"""

MASK = (1 << 64) - 1


def splitmix64(seed):
    z = (seed + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed):
        self.state = splitmix64(seed & MASK) or 0x9E3779B97F4A7C15

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK

    def random(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n):
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def weighted(self, items, weights):
        r = self.random() * sum(weights)
        acc = 0.0
        for item, w in zip(items, weights):
            acc += w
            if r < acc:
                return item
        return items[-1]
