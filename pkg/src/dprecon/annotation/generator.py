"""Monolingual dropped-pronoun generator: a bidirectional GRU gap tagger.

The sentence is wrapped as ``<s> x </s>``; gap ``g`` (0..J) sits between
padded positions ``g`` and ``g + 1`` and is classified from the forward state
at ``g`` and the backward state at ``g + 1`` into NONE or one pronoun of the
inventory.
"""

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .. import checkpoint
from ..autodiff import Graph
from ..seq2seq import gru_shapes, pad_batch, run_gru, uniform_init
from ..training import Adadelta, clip_global_norm
from ..vocab import BOS_ID, EOS_ID, Vocabulary, build_vocab
from .label import LabeledSentence

NONE = "<none>"


@dataclass(frozen=True)
class GeneratorConfig:
    embedding_dim: int = 32
    hidden_dim: int = 48
    epochs: int = 8
    batch_size: int = 32
    seed: int = 7
    init_scale: float = 0.1


def _shapes(cfg, vocab_size, n_classes):
    E, H = cfg.embedding_dim, cfg.hidden_dim
    shapes = {"dpgen/emb": (vocab_size, E), "dpgen/hid/W": (2 * H, H), "dpgen/hid/b": (H,),
              "dpgen/out/W": (H, n_classes), "dpgen/out/b": (n_classes,)}
    shapes.update(gru_shapes("dpgen/fwd/", E, H))
    shapes.update(gru_shapes("dpgen/bwd/", E, H))
    return shapes


class DpGenerator:
    """Per-gap distribution over ``[NONE] + inventory``."""

    def __init__(self, vocab, inventory, cfg=GeneratorConfig(), params=None):
        self.vocab = vocab
        self.inventory = list(inventory)
        self.labels = [NONE] + self.inventory
        self.cfg = cfg
        self.params = params if params is not None else uniform_init(
            _shapes(cfg, len(vocab), len(self.labels)), cfg.seed, cfg.init_scale)

    # -- graph ------------------------------------------------------------
    def _logits(self, g, sentences):
        ids, mask = pad_batch([[BOS_ID] + self.vocab.encode(s) + [EOS_ID] for s in sentences])
        H = self.cfg.hidden_dim
        emb = g.embedding(g.param("dpgen/emb", self.params["dpgen/emb"]), ids)
        fwd = run_gru(g, self.params, "dpgen/fwd/", emb, mask, H)
        bwd = run_gru(g, self.params, "dpgen/bwd/", emb, mask, H, reverse=True)
        n_gaps = ids.shape[1] - 1
        feats = g.stack([g.concat([fwd[k], bwd[k + 1]], axis=-1) for k in range(n_gaps)], axis=1)
        P = lambda n: g.param(n, self.params[n])  # noqa: E731
        hid = g.tanh(g.add(g.matmul(feats, P("dpgen/hid/W")), P("dpgen/hid/b")))
        logits = g.add(g.matmul(hid, P("dpgen/out/W")), P("dpgen/out/b"))
        gap_mask = mask[:, 1:]
        return logits, gap_mask

    def gap_probs(self, x):
        """(len(x) + 1, K) probabilities for one sentence."""
        g = Graph(record=False)
        logits, _ = self._logits(g, [list(x)])
        return g.softmax(logits).data[0, : len(x) + 1]

    def label(self, x, threshold=0.5):
        return label_monolingual(x, self, threshold)

    # -- persistence ------------------------------------------------------
    def save(self, directory):
        os.makedirs(directory, exist_ok=True)
        checkpoint.save(os.path.join(directory, "params.ckpt"), self.params)
        self.vocab.save(os.path.join(directory, "vocab.txt"))
        with open(os.path.join(directory, "meta.json"), "w", encoding="utf-8") as fh:
            json.dump({"inventory": self.inventory, "config": asdict(self.cfg)}, fh, ensure_ascii=False,
                      sort_keys=True, indent=1)

    @classmethod
    def load(cls, directory):
        with open(os.path.join(directory, "meta.json"), encoding="utf-8") as fh:
            meta = json.load(fh)
        vocab = Vocabulary.load(os.path.join(directory, "vocab.txt"))
        params = checkpoint.load(os.path.join(directory, "params.ckpt"))
        return cls(vocab, meta["inventory"], GeneratorConfig(**meta["config"]), params)


def _gap_labels(sent, labels):
    index = {tok: k for k, tok in enumerate(labels)}
    out = [0] * (len(sent.x) + 1)
    for gap, tok, _ in sorted(sent.insertions):
        if tok in index and out[gap] == 0:
            out[gap] = index[tok]
    return out


def train_dp_generator(labelled, inventory, cfg=GeneratorConfig()):
    """Fit a :class:`DpGenerator` on labelled sentences (insertions are the positives)."""
    labelled = [s for s in labelled if s.x]
    if not any(s.insertions for s in labelled):
        raise ValueError("labelled corpus has no insertions; nothing to learn")
    if not inventory:
        raise ValueError("empty pronoun inventory")
    vocab, _ = build_vocab([s.x for s in labelled], 10 ** 9)
    model = DpGenerator(vocab, inventory, cfg)
    targets = [_gap_labels(s, model.labels) for s in labelled]
    rng = np.random.default_rng(cfg.seed)
    opt = Adadelta()
    for _ in range(cfg.epochs):
        order = rng.permutation(len(labelled))
        order = sorted(order, key=lambda i: len(labelled[i].x))
        batches = [order[i:i + cfg.batch_size] for i in range(0, len(order), cfg.batch_size)]
        for b in rng.permutation(len(batches)):
            idx = batches[b]
            g = Graph()
            logits, gap_mask = model._logits(g, [labelled[i].x for i in idx])
            gold = np.zeros(gap_mask.shape, dtype=np.int64)
            for r, i in enumerate(idx):
                gold[r, : len(targets[i])] = targets[i]
            nll = g.mul(g.cross_entropy(logits, gold), gap_mask.astype(float))
            loss = g.sum(nll)
            grads = {k: v / len(idx) for k, v in g.backward(loss).items()}
            clip_global_norm(grads, 1.0)
            opt.update(model.params, grads)
    return model


def label_monolingual(x, model, threshold=0.5):
    """Insert the most probable pronoun wherever it beats both NONE and ``threshold``.

    Gaps next to a pronoun already in ``x`` are never filled, so relabelling
    a labelled sentence adds nothing around the existing pronouns.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    x = list(x)
    if not model.inventory or not x:
        return LabeledSentence(x, [])
    probs = model.gap_probs(x)
    pron = set(model.inventory)
    insertions = []
    for gap in range(len(x) + 1):
        if (gap > 0 and x[gap - 1] in pron) or (gap < len(x) and x[gap] in pron):
            continue
        k = 1 + int(np.argmax(probs[gap, 1:]))
        p = probs[gap, k]
        if p > threshold and p > probs[gap, 0]:
            insertions.append((gap, model.labels[k], None))
    return LabeledSentence(x, insertions)
