"""End-to-end synthetic experiment: annotate, train every system, decode, score.

Everything downstream of the seed is deterministic, so two runs with the
same :class:`ExperimentConfig` write byte-identical artifacts.
"""

import logging
import os
from dataclasses import asdict, dataclass, field
from importlib import resources

from .annotation import (
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
from . import checkpoint
from .corpus import SynthGrammar, corpus_bleu, dp_rate_stats, sign_test, synth_corpus
from .corpus.io import write_labelled, write_lines, write_sentences
from .corpus.stats import dropped_pronoun_recall
from .decoding import RerankWeights, beam_search, rerank, score_table, select_best
from .seq2seq import ModelConfig
from .training import TrainConfig, init_from_baseline, train
from .vocab import EOS_ID, Vocabulary, build_vocab

log = logging.getLogger(__name__)

# CLI variant name -> (model variant, trains on labelled source, reconstruction target)
SYSTEMS = {
    "baseline": ("Baseline", False, None),
    "baseline-dps": ("Baseline", True, None),
    "enc-rec": ("EncRec", False, "xhat"),
    "dec-rec": ("DecRec", False, "xhat"),
    "both": ("Both", False, "xhat"),
    "both-x": ("Both", False, "x"),
}


def data_file(name):
    return str(resources.files("dprecon") / "data" / name)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 1
    n_train: int = 10000
    n_tune: int = 500
    n_test: int = 500
    drop_rate: float = 0.3
    em_iterations: int = 5
    embedding_dim: int = 32
    hidden_dim: int = 64
    batch_size: int = 80
    baseline_epochs: int = 20
    stage2_epochs: int = 15
    # baselines keep training through the stage-2 epochs so every system sees
    # the same number of updates; stage 2 starts from the stage-1 best epoch
    equal_budget: bool = True
    beam_size: int = 10
    max_len: int = 30
    threshold: float = 0.5
    lambda_grid: tuple = (0.0, 0.25, 0.5, 1.0, 2.0)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    systems: tuple = tuple(SYSTEMS)

    def lines(self):
        out = []
        for k, v in asdict(self).items():
            if isinstance(v, dict):
                out += [f"{k}.{kk}={vv}" for kk, vv in v.items()]
            elif isinstance(v, tuple):
                out.append(f"{k}={','.join(str(e) for e in v)}")
            else:
                out.append(f"{k}={v}")
        return out


@dataclass
class Annotated:
    pairs: list
    train: list
    tune: list
    test: list
    train_labelled: list
    tune_mono: list
    test_mono: list
    f1: dict
    stats: dict


def _split(cfg, seq):
    a, b = cfg.n_train, cfg.n_train + cfg.n_tune
    return seq[:a], seq[a:b], seq[b:b + cfg.n_test]


def annotate(cfg):
    """Synthesise, align, project, train the generator, and label tune/test."""
    grammar = SynthGrammar(drop_rate=cfg.drop_rate, seed=cfg.seed)
    pairs = synth_corpus(grammar, cfg.n_train + cfg.n_tune + cfg.n_test)
    lexicon = read_lexicon(data_file("synth_lexicon.txt"))
    tgt_pron = read_inventory(data_file("synth_target_pronouns.txt"))
    src_pron = read_inventory(data_file("synth_source_pronouns.txt"))
    links, _, _ = em_align([(p.x, p.y) for p in pairs], cfg.em_iterations)
    gold = [LabeledSentence(p.x, list(p.drops)) for p in pairs]
    em_labelled = [label_parallel(p.x, p.y, lk, lexicon, tgt_pron) for p, lk in zip(pairs, links)]
    gold_aligned = [label_parallel(p.x, p.y, p.links, lexicon, tgt_pron) for p in pairs]
    train, tune, test = _split(cfg, pairs)
    train_labelled = _split(cfg, em_labelled)[0]
    gen = train_dp_generator(train_labelled, src_pron, cfg.generator)
    tune_mono = [label_monolingual(p.x, gen, cfg.threshold) for p in tune]
    test_mono = [label_monolingual(p.x, gen, cfg.threshold) for p in test]
    test_gold = _split(cfg, gold)[2]
    f1 = {
        "gold_alignment": labelling_f1(_split(cfg, gold_aligned)[2], test_gold),
        "em_alignment": labelling_f1(_split(cfg, em_labelled)[2], test_gold),
        "monolingual": labelling_f1(test_mono, test_gold),
    }
    stats = {name: dp_rate_stats(part, [p.y for p in ps], src_pron, tgt_pron)
             for name, part, ps in zip(("train", "tune", "test"), _split(cfg, gold), (train, tune, test))}
    return Annotated(pairs, train, tune, test, train_labelled, tune_mono, test_mono, f1, stats)


def _model_config(cfg, variant, sv, tv):
    return ModelConfig(len(sv), len(tv), cfg.embedding_dim, cfg.hidden_dim, cfg.hidden_dim,
                       max_train_length=cfg.max_len, variant=variant)


def _train_config(cfg, epochs):
    return TrainConfig(batch_size=cfg.batch_size, epochs=epochs, shuffle_seed=cfg.seed,
                       max_length=cfg.max_len, init_seed=cfg.seed)


def _decode(params, mcfg, sources, cfg):
    return [beam_search(x, params, mcfg, cfg.beam_size, cfg.max_len) for x in sources]


def _strip(tokens):
    return [t for t in tokens if t != EOS_ID]


def _tune_lambda(kbests, sources, xhats, params, mcfg, refs, tv, grid):
    """Pick ``lambda_dec`` on the tuning set by BLEU (ties keep the smaller weight)."""
    tables = [score_table(k, x, xh, params, mcfg) for k, x, xh in zip(kbests, sources, xhats)]
    best_lam, best_bleu = 0.0, -1.0
    scores = {}
    for lam in grid:
        w = RerankWeights(lambda_enc=0.0, lambda_dec=lam)
        hyps = [tv.decode(t[select_best(t, w)]["tokens"]) for t in tables]
        b = corpus_bleu(hyps, refs).score
        scores[lam] = b
        if b > best_bleu:
            best_lam, best_bleu = lam, b
    return best_lam, scores


def run(cfg, out_dir, progress=None):
    """Run the whole experiment and write artifacts to ``out_dir``.

    Returns the metric report as an ordered dict of ``key -> value`` strings.
    """
    os.makedirs(out_dir, exist_ok=True)
    say = progress or log.info
    write_lines(os.path.join(out_dir, "config.txt"), cfg.lines())
    ann = annotate(cfg)
    say("annotation done")
    write_labelled(os.path.join(out_dir, "data", "train"), ann.train_labelled, [p.y for p in ann.train])
    write_labelled(os.path.join(out_dir, "data", "tune"), ann.tune_mono, [p.y for p in ann.tune])
    write_labelled(os.path.join(out_dir, "data", "test"), ann.test_mono, [p.y for p in ann.test])

    sv, _ = build_vocab([s.tokens for s in ann.train_labelled], 10 ** 6)
    tv, _ = build_vocab([p.y for p in ann.train], 10 ** 6)
    sv.save(os.path.join(out_dir, "data", "vocab.src"))
    tv.save(os.path.join(out_dir, "data", "vocab.tgt"))

    def enc_src(sents):
        return [sv.encode(s) for s in sents]

    train_x = enc_src([p.x for p in ann.train])
    train_xhat = enc_src([s.tokens for s in ann.train_labelled])
    train_y = [tv.encode(p.y, add_eos=True) for p in ann.train]
    tune_x = enc_src([p.x for p in ann.tune])
    tune_xhat = enc_src([s.tokens for s in ann.tune_mono])
    tune_y = [tv.encode(p.y, add_eos=True) for p in ann.tune]
    test_x = enc_src([p.x for p in ann.test])
    test_xhat = enc_src([s.tokens for s in ann.test_mono])
    tune_refs = [p.y for p in ann.tune]
    test_refs = [p.y for p in ann.test]
    tgt_pron = read_inventory(data_file("synth_target_pronouns.txt"))
    dropped = [[j for _, _, j in p.drops] for p in ann.test]

    report = {}
    for name, (p, r, f) in ann.f1.items():
        report[f"f1.{name}"] = f"{f:.4f}"
        report[f"precision.{name}"] = f"{p:.4f}"
        report[f"recall.{name}"] = f"{r:.4f}"
    for split, st in ann.stats.items():
        report[f"dp_rate.{split}"] = f"{st.dp_rate:.6f}"
        report[f"pronouns.{split}"] = str(st.tgt_pronouns)
        report[f"dps.{split}"] = str(st.insertions)

    outputs = {}
    wanted = [s for s in SYSTEMS if s in cfg.systems]
    if any(SYSTEMS[s][2] for s in wanted) and "baseline" not in wanted:
        raise ValueError("reconstructor systems need the baseline system for stage-1 parameters")
    extend = cfg.equal_budget and any(SYSTEMS[s][2] for s in wanted)
    stage1 = None
    for name in wanted:
        variant, labelled_src, rec_target = SYSTEMS[name]
        mcfg = _model_config(cfg, variant, sv, tv)
        sys_dir = os.path.join(out_dir, name)
        src_train = train_xhat if labelled_src else train_x
        src_tune = tune_xhat if labelled_src else tune_x
        src_test = test_xhat if labelled_src else test_x
        rec = train_x if rec_target == "x" else train_xhat
        triples = [(x, y, xh + [EOS_ID]) for x, y, xh in zip(src_train, train_y, rec)]
        if rec_target is None:
            init, epochs = None, cfg.baseline_epochs + (cfg.stage2_epochs if extend else 0)
        else:
            init, epochs = init_from_baseline(stage1, mcfg, cfg.seed), cfg.stage2_epochs
        os.makedirs(sys_dir, exist_ok=True)
        with open(os.path.join(sys_dir, "train.log"), "w") as fh:
            params, history = train(triples, mcfg, _train_config(cfg, epochs), list(zip(src_tune, tune_y)),
                                    params=init, out_dir=sys_dir, log_fh=_NoTime(fh))
        if name == "baseline":
            stage1 = params
            if extend:
                best = max(range(cfg.baseline_epochs + 1), key=lambda e: (history[e].tune, -e))
                stage1 = checkpoint.load(os.path.join(sys_dir, f"epoch{best:03d}.ckpt"))
                report["stage1_epoch"] = str(best)
        say(f"{name}: trained")

        kbest = _decode(params, mcfg, src_test, cfg)
        one_best = [tv.decode(_strip(k[0].tokens)) for k in kbest]
        outputs[name] = one_best
        write_sentences(os.path.join(sys_dir, "test.1best"), one_best)
        if rec_target is not None:
            tune_kbest = _decode(params, mcfg, src_tune, cfg)
            lam, grid_scores = _tune_lambda(tune_kbest, src_tune, tune_xhat, params, mcfg, tune_refs, tv,
                                            cfg.lambda_grid if mcfg.has_dec_rec else (0.0,))
            weights = RerankWeights(lambda_enc=0.0, lambda_dec=lam)
            reranked = [tv.decode(_strip(rerank(k, x, xh, params, mcfg, weights)[0].tokens))
                        for k, x, xh in zip(kbest, src_test, test_xhat)]
            outputs[name + "+rerank"] = reranked
            write_sentences(os.path.join(sys_dir, "test.rerank"), reranked)
            report[f"lambda_dec.{name}"] = f"{lam}"
            for l, b in grid_scores.items():
                report[f"tune_bleu.{name}.lambda{l}"] = f"{b:.2f}"
        say(f"{name}: decoded")

    for name, hyps in outputs.items():
        res = corpus_bleu(hyps, test_refs)
        rec, tot = dropped_pronoun_recall(hyps, test_refs, dropped, tgt_pron)
        report[f"bleu.{name}"] = f"{res.score:.2f}"
        report[f"dp_recall.{name}"] = f"{100.0 * rec / max(tot, 1):.2f}"
        report[f"dp_recalled.{name}"] = f"{rec}/{tot}"
        if name != "baseline" and "baseline" in outputs:
            st = sign_test(hyps, outputs["baseline"], test_refs)
            report[f"sign.{name}"] = st.line()
    write_lines(os.path.join(out_dir, "report.txt"), [f"{k}={v}" for k, v in report.items()])
    return report


def load_system(out_dir, name, cfg):
    """``(params, model_config, source_vocab, target_vocab)`` of a trained system."""
    sv = Vocabulary.load(os.path.join(out_dir, "data", "vocab.src"))
    tv = Vocabulary.load(os.path.join(out_dir, "data", "vocab.tgt"))
    params = checkpoint.load(os.path.join(out_dir, name, "best.ckpt"))
    return params, _model_config(cfg, SYSTEMS[name][0], sv, tv), sv, tv


class _NoTime:
    """Log sink that drops the wall-clock field so logs are reproducible."""

    def __init__(self, fh):
        self.fh = fh

    def write(self, line):
        self.fh.write(" ".join(t for t in line.split(" ") if not t.startswith("time=")).rstrip() + "\n")

    def flush(self):
        self.fh.flush()


def parse_report(path):
    with open(path, encoding="utf-8") as fh:
        return dict(line.rstrip("\n").split("=", 1) for line in fh if "=" in line)


__all__ = ["ExperimentConfig", "SYSTEMS", "annotate", "run", "load_system", "parse_report", "data_file"]
