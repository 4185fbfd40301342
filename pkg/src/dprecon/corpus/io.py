"""Plain-text corpus files: one tokenized sentence per line, space separated.

A labelled corpus is stored as three line-aligned files ``<prefix>.x``,
``<prefix>.y`` and ``<prefix>.xhat`` plus ``<prefix>.ins``, whose lines are
``sentence_index gap token``.
"""

import os

from ..annotation.label import LabeledSentence


def read_sentences(path):
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh]


def write_sentences(path, sentences):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sentences:
            fh.write(" ".join(s) + "\n")


def write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def write_labelled(prefix, labelled, targets=None):
    """Write the labelled corpus; ``targets=None`` skips the ``.y`` file."""
    if targets is not None and len(labelled) != len(targets):
        raise ValueError("labelled and target corpora differ in length")
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)
    write_sentences(prefix + ".x", [s.x for s in labelled])
    if targets is not None:
        write_sentences(prefix + ".y", targets)
    write_sentences(prefix + ".xhat", [s.tokens for s in labelled])
    write_lines(prefix + ".ins", [f"{n} {gap} {tok}" for n, s in enumerate(labelled)
                                  for gap, tok, _ in sorted(s.insertions, key=lambda e: e[0])])


def read_labelled(prefix):
    """Returns ``(labelled, targets)``; the ``.xhat`` file is checked against the log."""
    xs = read_sentences(prefix + ".x")
    ys = read_sentences(prefix + ".y")
    if len(xs) != len(ys):
        raise ValueError(f"{prefix}: .x has {len(xs)} lines but .y has {len(ys)}")
    ins = [[] for _ in xs]
    if os.path.exists(prefix + ".ins"):
        for lineno, line in enumerate(read_sentences(prefix + ".ins"), 1):
            if not line:
                continue
            try:
                n, gap, tok = int(line[0]), int(line[1]), line[2]
            except (IndexError, ValueError):
                raise ValueError(f"{prefix}.ins:{lineno}: expected 'sentence gap token'") from None
            if not (0 <= n < len(xs) and 0 <= gap <= len(xs[n])):
                raise ValueError(f"{prefix}.ins:{lineno}: insertion out of range")
            ins[n].append((gap, tok, None))
    labelled = [LabeledSentence(x, i) for x, i in zip(xs, ins)]
    if os.path.exists(prefix + ".xhat"):
        for n, (s, xh) in enumerate(zip(labelled, read_sentences(prefix + ".xhat"))):
            if s.tokens != xh:
                raise ValueError(f"{prefix}.xhat line {n + 1} disagrees with the insertion log")
    return labelled, ys
