"""Train a tiny baseline, fine-tune it with both reconstructors, then decode and rerank.

Sizes are kept small so this finishes in a couple of minutes; the full
experiment lives in ``dprecon.experiment``.
"""

from dprecon.annotation import LabeledSentence
from dprecon.corpus import SynthGrammar, bleu, synth_corpus
from dprecon.decoding import RerankWeights, beam_search, rerank
from dprecon.seq2seq import ModelConfig
from dprecon.training import TrainConfig, init_from_baseline, train
from dprecon.vocab import EOS_ID, build_vocab

pairs = synth_corpus(SynthGrammar(seed=2), 1200)
train_pairs, tune_pairs, test_pairs = pairs[:1000], pairs[1000:1100], pairs[1100:]
sv, _ = build_vocab([p.x_hat for p in pairs[:1000]], 1000)
tv, _ = build_vocab([p.y for p in pairs[:1000]], 1000)


def triple(p):
    return sv.encode(p.x), tv.encode(p.y, add_eos=True), sv.encode(p.x_hat, add_eos=True)


data = [triple(p) for p in train_pairs]
tune = [t[:2] for t in map(triple, tune_pairs)]
tcfg = TrainConfig(batch_size=20, epochs=8)

base_cfg = ModelConfig(len(sv), len(tv), 24, 48, 48, variant="Baseline")
baseline, hist = train(data, base_cfg, tcfg, tune)
print("baseline tune ll per token by epoch:", [round(r.tune, 3) for r in hist])

both_cfg = ModelConfig(len(sv), len(tv), 24, 48, 48, variant="Both")
both, hist = train(data, both_cfg, TrainConfig(batch_size=20, epochs=4), tune,
                   params=init_from_baseline(baseline, both_cfg))
print("stage 2, epoch 0 repeats the baseline:", hist[0].line())
print("stage 2, last epoch                  :", hist[-1].line())

refs = [p.y for p in test_pairs]
hyps, reranked = [], []
for p in test_pairs:
    x = sv.encode(p.x)
    kbest = beam_search(x, both, both_cfg, beam_size=5, max_len=20)
    hyps.append(tv.decode(kbest[0].tokens))
    # the gold labelled source stands in for the monolingual tagger here
    best, _ = rerank(kbest, x, sv.encode(LabeledSentence(p.x, p.drops).tokens), both, both_cfg,
                     RerankWeights(lambda_enc=0.0, lambda_dec=1.0))
    reranked.append(tv.decode(best.tokens))
print("BLEU 1-best %.2f, reranked %.2f" % (bleu(hyps, refs), bleu(reranked, refs)))
for p, h in list(zip(test_pairs, reranked))[:3]:
    print("  ", " ".join(p.x), "=>", " ".join(h))
