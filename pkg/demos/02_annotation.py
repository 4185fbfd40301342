"""From a synthetic pro-drop corpus to labelled sources, by alignment and by a monolingual tagger."""

from dprecon.annotation import (
    GeneratorConfig,
    LabeledSentence,
    em_align,
    label_monolingual,
    label_parallel,
    labelling_f1,
    read_inventory,
    read_lexicon,
    train_dp_generator,
)
from dprecon.corpus import SynthGrammar, dp_rate_stats, synth_corpus
from dprecon.experiment import data_file

grammar = SynthGrammar(drop_rate=0.3, seed=5)
pairs = synth_corpus(grammar, 3000)
train, test = pairs[:2700], pairs[2700:]

p = pairs[0]
print("x     :", " ".join(p.x))
print("y     :", " ".join(p.y))
print("gold x̂:", " ".join(p.x_hat))

lexicon = read_lexicon(data_file("synth_lexicon.txt"))
tgt_pron = read_inventory(data_file("synth_target_pronouns.txt"))
src_pron = read_inventory(data_file("synth_source_pronouns.txt"))

links, _, _ = em_align([(q.x, q.y) for q in pairs], iterations=5)
projected = [label_parallel(q.x, q.y, lk, lexicon, tgt_pron) for q, lk in zip(pairs, links)]
gold = [LabeledSentence(q.x, q.drops) for q in test]

print("\nstatistics of the gold labelling (train part):")
print(dp_rate_stats([LabeledSentence(q.x, q.drops) for q in train], [q.y for q in train], src_pron, tgt_pron).table())

tagger = train_dp_generator(projected[:2700], src_pron, GeneratorConfig(epochs=6))
mono = [label_monolingual(q.x, tagger) for q in test]

print("\nlabelling F1 on held-out sentences")
print("  EM alignment + projection : %.3f" % labelling_f1(projected[2700:], gold)[2])
print("  monolingual tagger        : %.3f" % labelling_f1(mono, gold)[2])
for q, m in list(zip(test, mono))[:3]:
    print("   ", " ".join(q.x), "->", " ".join(m.tokens))
