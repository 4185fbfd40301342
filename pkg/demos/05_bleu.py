"""Corpus BLEU, its pieces, and the sign test."""

from dprecon.corpus import corpus_bleu, sign_test

cand = ["a b c d e".split()]
ref = ["a b c d f".split()]
print(corpus_bleu(cand, ref).line())

sys_a = [s.split() for s in ("the cat sat", "he likes it", "she came today")]
sys_b = [s.split() for s in ("cat sat", "likes it", "she came today")]
refs = [s.split() for s in ("the cat sat", "he likes it", "she came today")]
print("A:", corpus_bleu(sys_a, refs).line())
print("B:", corpus_bleu(sys_b, refs).line())
print("A vs B:", sign_test(sys_a, sys_b, refs).line())
