"""Command-line entry point: ``dprecon <command> [options]``.

Options resolve as built-in defaults < ``--config`` file < command-line
flags.  Every command writes its effective configuration next to its
artifacts and ends by printing one ``summary:`` line of ``key=value`` pairs.

Exit status: 0 success, 2 usage error, 3 invalid data or configuration,
4 numeric failure (NaN / failed gradient check).
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

from . import checkpoint
from .annotation import (
    DpGenerator,
    GeneratorConfig,
    em_align,
    format_pharaoh,
    label_monolingual,
    label_parallel,
    read_inventory,
    read_lexicon,
    read_pharaoh,
    train_dp_generator,
)
from .annotation.label import LabeledSentence
from .autodiff import NumericError
from .corpus import SynthGrammar, corpus_bleu, dp_rate_stats, sign_test, synth_corpus
from .corpus.io import read_labelled, read_sentences, write_labelled, write_lines, write_sentences
from .decoding import RerankWeights, beam_search, format_kbest, rerank
from .experiment import SYSTEMS, data_file
from .gradcheck import check_variant
from .seq2seq import VARIANTS, ModelConfig
from .training import TrainConfig, TrainingError, init_from_baseline, train
from .vocab import EOS_ID, Vocabulary, build_vocab

log = logging.getLogger("dprecon")

WORKERS_ENV = "DPRECON_WORKERS"
EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


class DataError(ValueError):
    """Input files or configuration failed validation."""


# ---------------------------------------------------------------------------
# option tables: (flag, type, default, help); default None means required
# ---------------------------------------------------------------------------

_SEED = ("seed", int, 1, "random seed")

COMMANDS = {
    "synth": ("generate a synthetic pro-drop corpus with gold annotations", [
        ("out", str, None, "output prefix (.x .y .xhat .ins .align .drops)"),
        ("n", int, 1000, "number of sentence pairs"),
        ("drop_rate", float, 0.3, "probability of dropping each source pronoun"),
        _SEED,
    ]),
    "align": ("IBM Model 1 alignment, intersected in both directions", [
        ("src", str, None, "source sentence file"),
        ("tgt", str, None, "target sentence file"),
        ("out", str, None, "output alignment file (Pharaoh i-j)"),
        ("iterations", int, 5, "EM iterations"),
    ]),
    "annotate": ("project unaligned target pronouns into the source", [
        ("src", str, None, "source sentence file"),
        ("tgt", str, None, "target sentence file"),
        ("align", str, None, "alignment file (Pharaoh)"),
        ("out", str, None, "output prefix for the labelled corpus"),
        ("lexicon", str, "zh_en_lexicon.txt", "pronoun lexicon (bundled name or path)"),
        ("target_pronouns", str, "en_target_pronouns.txt", "target pronoun inventory (bundled name or path)"),
    ]),
    "train-dp": ("train the monolingual dropped-pronoun generator", [
        ("data", str, None, "labelled corpus prefix"),
        ("out", str, None, "output model directory"),
        ("source_pronouns", str, "zh_source_pronouns.txt", "source pronoun inventory (bundled name or path)"),
        ("epochs", int, GeneratorConfig.epochs, "training epochs"),
        ("embedding_dim", int, GeneratorConfig.embedding_dim, "embedding size"),
        ("hidden_dim", int, GeneratorConfig.hidden_dim, "hidden size"),
        ("batch_size", int, GeneratorConfig.batch_size, "batch size"),
        _SEED,
    ]),
    "label": ("label dropped pronouns in monolingual source text", [
        ("model", str, None, "generator directory"),
        ("src", str, None, "source sentence file"),
        ("out", str, None, "output prefix for the labelled corpus"),
        ("threshold", float, 0.5, "insertion probability threshold"),
    ]),
    "train": ("train a translation model", [
        ("variant", str, None, "one of " + ", ".join(v for v in SYSTEMS if v != "both-x")),
        ("data", str, None, "labelled training corpus prefix"),
        ("out", str, None, "output model directory"),
        ("tune", str, "", "labelled tuning corpus prefix (model selection)"),
        ("init", str, "", "baseline model directory for two-stage training"),
        ("embedding_dim", int, 620, "embedding size"),
        ("hidden_dim", int, 1000, "hidden size"),
        ("rec_hidden_dim", int, 0, "reconstructor hidden size (0: same as hidden_dim)"),
        ("vocab_size", int, 30000, "vocabulary cap per side"),
        ("max_length", int, 20, "maximum training sentence length"),
        ("dropout", float, 0.0, "dropout rate on the readout layer"),
        ("epochs", int, 20, "training epochs"),
        ("batch_size", int, 80, "batch size"),
        ("patience", int, 0, "early stopping patience (0: off)"),
        _SEED,
    ]),
    "translate": ("beam-search translation", [
        ("model", str, None, "model directory"),
        ("src", str, None, "source sentence file (labelled source for baseline-dps)"),
        ("out", str, None, "output translation file"),
        ("beam", int, 10, "beam size"),
        ("max_len", int, 80, "maximum output length"),
        ("kbest", str, "", "optional k-best output file"),
        ("workers", int, 0, f"worker processes (0: ${WORKERS_ENV} or 1)"),
    ]),
    "rerank": ("translate and rerank the k-best list with reconstruction scores", [
        ("model", str, None, "model directory"),
        ("src", str, None, "source sentence file"),
        ("xhat", str, None, "labelled source file (reconstruction target)"),
        ("out", str, None, "output translation file"),
        ("lambda_enc", float, 1.0, "encoder-side reconstruction weight"),
        ("lambda_dec", float, 1.0, "decoder-side reconstruction weight"),
        ("beam", int, 10, "beam size"),
        ("max_len", int, 80, "maximum output length"),
        ("kbest", str, "", "optional scored k-best output file"),
        ("workers", int, 0, f"worker processes (0: ${WORKERS_ENV} or 1)"),
    ]),
    "evaluate": ("case-insensitive corpus BLEU-4 and sign test", [
        ("hyp", str, None, "candidate translation file"),
        ("ref", str, None, "reference file"),
        ("baseline", str, "", "second system for the sign test"),
        ("workers", int, 0, "accepted for symmetry; scoring is single-pass"),
    ]),
    "stats": ("corpus statistics and dropped-pronoun rate", [
        ("data", str, None, "labelled corpus prefix"),
        ("source_pronouns", str, "zh_source_pronouns.txt", "source pronoun inventory"),
        ("target_pronouns", str, "en_target_pronouns.txt", "target pronoun inventory"),
    ]),
    "gradcheck": ("finite-difference gradient check on a tiny model", [
        ("variant", str, "all", "Baseline, EncRec, DecRec, Both or all"),
        ("epsilon", float, 1e-4, "finite-difference step"),
        ("tolerance", float, 1e-4, "maximum allowed relative error"),
        _SEED,
    ]),
}

DEFAULTS = {cmd: {name: default for name, _, default, _ in opts} for cmd, (_, opts) in COMMANDS.items()}
TYPES = {cmd: {name: typ for name, typ, _, _ in opts} for cmd, (_, opts) in COMMANDS.items()}


def build_parser():
    parser = argparse.ArgumentParser(prog="dprecon", description="Dropped-pronoun aware NMT toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for cmd, (help_text, opts) in COMMANDS.items():
        p = sub.add_parser(cmd, help=help_text, description=help_text)
        for name, typ, default, help_ in opts:
            shown = "required" if default is None else f"default: {default}"
            p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=argparse.SUPPRESS,
                           help=f"{help_} ({shown})")
        p.add_argument("--config", default=argparse.SUPPRESS, help="key=value configuration file")
        p.add_argument("--dry-run", action="store_true", help="validate configuration and inputs only")
        p.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    return parser


def read_config_file(path, cmd):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in TYPES[cmd]:
                raise DataError(f"{path}:{lineno}: unknown option {key!r} for {cmd}")
            try:
                out[key] = TYPES[cmd][key](value)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def resolve(cmd, ns):
    """Merge defaults, the config file and explicit flags; check required options."""
    conf = dict(DEFAULTS[cmd])
    if hasattr(ns, "config"):
        conf.update(read_config_file(ns.config, cmd))
    conf.update({k: v for k, v in vars(ns).items() if k in conf})
    missing = [k for k, v in conf.items() if v is None]
    if missing:
        raise DataError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return conf


def write_effective_config(path, cmd, conf):
    lines = [f"command={cmd}"] + [f"{k}={conf[k]}" for k in sorted(conf)]
    write_lines(path, lines)


def summary(cmd, **fields):
    parts = [f"command={cmd}", "status=ok"] + [f"{k}={v}" for k, v in fields.items()]
    print("summary: " + " ".join(parts), flush=True)


def _resource(name):
    return name if os.path.exists(name) else data_file(name)


def _require(*paths):
    for p in paths:
        if p and not os.path.exists(p):
            raise DataError(f"input not found: {p}")


def _workers(conf):
    n = conf.get("workers", 0) or int(os.environ.get(WORKERS_ENV, "1") or 1)
    if n < 1:
        raise DataError("workers must be >= 1")
    return n


def _parallel_map(fn, items, workers, initargs):
    """Order-preserving map; ``fn`` and its shared state live in module globals."""
    if workers == 1 or len(items) < 2:
        _init_worker(*initargs)
        return [fn(it) for it in items]
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=initargs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


_STATE = {}


def _init_worker(*state):
    _STATE["state"] = state


# ---------------------------------------------------------------------------
# model directory helpers
# ---------------------------------------------------------------------------

def save_model_dir(out, params, mcfg, system, sv, tv):
    os.makedirs(out, exist_ok=True)
    checkpoint.save(os.path.join(out, "model.ckpt"), params)
    sv.save(os.path.join(out, "vocab.src"))
    tv.save(os.path.join(out, "vocab.tgt"))
    write_lines(os.path.join(out, "model.txt"), [f"system={system}"] + [f"{k}={v}" for k, v in asdict(mcfg).items()])


def load_model_dir(path):
    meta_path = os.path.join(path, "model.txt")
    _require(meta_path, os.path.join(path, "model.ckpt"))
    with open(meta_path, encoding="utf-8") as fh:
        meta = dict(line.rstrip("\n").split("=", 1) for line in fh if "=" in line)
    system = meta.pop("system")
    fields = ModelConfig.__dataclass_fields__
    casts = {"int": int, "float": float, "str": str}
    kwargs = {}
    for k, v in meta.items():
        typ = fields[k].type
        kwargs[k] = casts.get(typ, typ)(v) if isinstance(typ, str) else typ(v)
    mcfg = ModelConfig(**kwargs)
    params = checkpoint.load(os.path.join(path, "model.ckpt"))
    return params, mcfg, system, Vocabulary.load(os.path.join(path, "vocab.src")), \
        Vocabulary.load(os.path.join(path, "vocab.tgt"))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_synth(conf, dry):
    if conf["n"] < 1:
        raise DataError("--n must be >= 1")
    grammar = SynthGrammar(drop_rate=conf["drop_rate"], seed=conf["seed"])
    if dry:
        return {"n": conf["n"]}
    pairs = synth_corpus(grammar, conf["n"])
    out = conf["out"]
    labelled = [LabeledSentence(p.x, list(p.drops)) for p in pairs]
    write_labelled(out, labelled, [p.y for p in pairs])
    write_lines(out + ".align", [format_pharaoh(p.links) for p in pairs])
    write_lines(out + ".drops", [f"{n} {gap} {tok} {j}" for n, p in enumerate(pairs) for gap, tok, j in p.drops])
    write_effective_config(out + ".config", "synth", conf)
    drops = sum(len(p.drops) for p in pairs)
    slots = sum(p.slots for p in pairs)
    return {"pairs": len(pairs), "drops": drops, "pronoun_slots": slots, "drop_rate": f"{drops / max(slots, 1):.6f}"}


def _read_parallel(src, tgt):
    _require(src, tgt)
    xs, ys = read_sentences(src), read_sentences(tgt)
    if len(xs) != len(ys):
        raise DataError(f"{src} has {len(xs)} lines but {tgt} has {len(ys)}")
    if not xs:
        raise DataError("empty corpus")
    return xs, ys


def cmd_align(conf, dry):
    xs, ys = _read_parallel(conf["src"], conf["tgt"])
    if conf["iterations"] < 1:
        raise DataError("--iterations must be >= 1")
    if dry:
        return {"pairs": len(xs)}
    links, fwd, _ = em_align(list(zip(xs, ys)), conf["iterations"])
    write_lines(conf["out"], [format_pharaoh(lk) for lk in links])
    write_effective_config(conf["out"] + ".config", "align", conf)
    return {"pairs": len(xs), "links": sum(map(len, links)), "max_row_dev": f"{fwd.history[-1]:.2e}"}


def cmd_annotate(conf, dry):
    xs, ys = _read_parallel(conf["src"], conf["tgt"])
    _require(conf["align"])
    with open(conf["align"], encoding="utf-8") as fh:
        links = [read_pharaoh(line) for line in fh]
    if len(links) != len(xs):
        raise DataError(f"{conf['align']} has {len(links)} lines for {len(xs)} sentence pairs")
    lexicon = read_lexicon(_resource(conf["lexicon"]))
    tgt_pron = read_inventory(_resource(conf["target_pronouns"]))
    if dry:
        return {"pairs": len(xs)}
    labelled = [label_parallel(x, y, lk, lexicon, tgt_pron) for x, y, lk in zip(xs, ys, links)]
    write_labelled(conf["out"], labelled, ys)
    write_effective_config(conf["out"] + ".config", "annotate", conf)
    return {"pairs": len(xs), "insertions": sum(len(s.insertions) for s in labelled)}


def cmd_train_dp(conf, dry):
    _require(conf["data"] + ".x")
    labelled, _ = read_labelled(conf["data"])
    inventory = read_inventory(_resource(conf["source_pronouns"]))
    gcfg = GeneratorConfig(conf["embedding_dim"], conf["hidden_dim"], conf["epochs"], conf["batch_size"],
                           conf["seed"])
    if not any(s.insertions for s in labelled):
        raise DataError("labelled corpus has no insertions; nothing to learn")
    if dry:
        return {"sentences": len(labelled)}
    model = train_dp_generator(labelled, inventory, gcfg)
    model.save(conf["out"])
    write_effective_config(os.path.join(conf["out"], "config.txt"), "train-dp", conf)
    return {"sentences": len(labelled), "out": conf["out"]}


def cmd_label(conf, dry):
    _require(conf["src"], os.path.join(conf["model"], "meta.json"))
    if not 0.0 < conf["threshold"] < 1.0:
        raise DataError("--threshold must be in (0, 1)")
    xs = read_sentences(conf["src"])
    if dry:
        return {"sentences": len(xs)}
    model = DpGenerator.load(conf["model"])
    labelled = [label_monolingual(x, model, conf["threshold"]) for x in xs]
    write_labelled(conf["out"], labelled)
    write_effective_config(conf["out"] + ".config", "label", conf)
    return {"sentences": len(xs), "insertions": sum(len(s.insertions) for s in labelled)}


def _system_variant(name):
    if name not in SYSTEMS or name == "both-x":
        raise DataError(f"unknown variant {name!r}; choose from "
                        + ", ".join(v for v in SYSTEMS if v != "both-x"))
    return SYSTEMS[name]


def cmd_train(conf, dry):
    variant, labelled_src, rec_target = _system_variant(conf["variant"])
    _require(conf["data"] + ".x", conf["data"] + ".y", conf["tune"] and conf["tune"] + ".x", conf["init"])
    labelled, ys = read_labelled(conf["data"])
    if not labelled:
        raise DataError("empty training corpus")
    if rec_target is not None and not conf["init"]:
        log.warning("reconstructor variant trained without --init; starting from scratch")
    init_params = None
    if conf["init"]:
        base, base_cfg, _, sv, tv = load_model_dir(conf["init"])
        dims = dict(embedding_dim=base_cfg.embedding_dim, hidden_dim=base_cfg.hidden_dim)
        if (conf["embedding_dim"], conf["hidden_dim"]) != (dims["embedding_dim"], dims["hidden_dim"]):
            log.info("using the baseline's dimensions %s", dims)
        conf.update(dims)
    else:
        src_side = [s.tokens for s in labelled]
        sv, _ = build_vocab(src_side, conf["vocab_size"])
        tv, _ = build_vocab(ys, conf["vocab_size"])
    mcfg = ModelConfig(len(sv), len(tv), conf["embedding_dim"], conf["hidden_dim"],
                       conf["rec_hidden_dim"] or conf["hidden_dim"], conf["max_length"], conf["dropout"], variant)
    tcfg = TrainConfig(batch_size=conf["batch_size"], epochs=conf["epochs"], shuffle_seed=conf["seed"],
                       max_length=conf["max_length"], init_seed=conf["seed"], patience=conf["patience"])
    if conf["init"]:
        init_params = init_from_baseline(base, mcfg, conf["seed"])

    def triples(lab, targets):
        out = []
        for s, y in zip(lab, targets):
            x = sv.encode(s.tokens if labelled_src else s.x)
            out.append((x, tv.encode(y, add_eos=True), sv.encode(s.tokens, add_eos=True)))
        return out

    data = triples(labelled, ys)
    tune = []
    if conf["tune"]:
        tl, ty = read_labelled(conf["tune"])
        tune = [(x, y) for x, y, _ in triples(tl, ty)]
    if dry:
        return {"sentences": len(data), "variant": conf["variant"]}
    os.makedirs(conf["out"], exist_ok=True)
    write_effective_config(os.path.join(conf["out"], "config.txt"), "train", conf)
    with open(os.path.join(conf["out"], "train.log"), "w", encoding="utf-8") as fh:
        params, history = train(data, mcfg, tcfg, tune, params=init_params,
                                out_dir=os.path.join(conf["out"], "epochs"), log_fh=fh)
    save_model_dir(conf["out"], params, mcfg, conf["variant"], sv, tv)
    epoch0 = history[0].parts["likelihood"]
    return {"variant": conf["variant"], "epochs": len(history) - 1, "epoch0_nll": f"{epoch0:.6f}",
            "final_nll": f"{history[-1].parts['likelihood']:.6f}"}


def _translate_one(x):
    params, mcfg, beam, max_len = _STATE["state"][:4]
    return beam_search(x, params, mcfg, beam, max_len)


def _rerank_one(item):
    params, mcfg, beam, max_len, weights = _STATE["state"]
    x, xh = item
    kbest = beam_search(x, params, mcfg, beam, max_len)
    best, table = rerank(kbest, x, xh, params, mcfg, weights)
    return best, table


def _decode_setup(conf):
    _require(conf["src"])
    params, mcfg, system, sv, tv = load_model_dir(conf["model"])
    xs = read_sentences(conf["src"])
    if any(not x for x in xs):
        raise DataError(f"{conf['src']}: empty source line")
    if conf["beam"] < 1 or conf["max_len"] < 1:
        raise DataError("--beam and --max-len must be >= 1")
    return params, mcfg, system, sv, tv, xs


def cmd_translate(conf, dry):
    params, mcfg, system, sv, tv, xs = _decode_setup(conf)
    workers = _workers(conf)
    if dry:
        return {"sentences": len(xs)}
    ids = [sv.encode(x) for x in xs]
    kbests = _parallel_map(_translate_one, ids, workers, (params, mcfg, conf["beam"], conf["max_len"]))
    write_sentences(conf["out"], [tv.decode([t for t in k[0].tokens if t != EOS_ID]) for k in kbests])
    if conf["kbest"]:
        lines = []
        for n, k in enumerate(kbests):
            table = [{"rank": r, "tokens": h.tokens, "log_likelihood": h.log_likelihood,
                      "enc_rec": None, "dec_rec": None} for r, h in enumerate(k)]
            lines += format_kbest(n, table, tv)
        write_lines(conf["kbest"], lines)
    write_effective_config(conf["out"] + ".config", "translate", conf)
    return {"sentences": len(xs), "system": system, "workers": workers}


def cmd_rerank(conf, dry):
    params, mcfg, system, sv, tv, xs = _decode_setup(conf)
    _require(conf["xhat"])
    xhats = read_sentences(conf["xhat"])
    if len(xhats) != len(xs):
        raise DataError(f"{conf['xhat']} has {len(xhats)} lines for {len(xs)} sources")
    try:
        weights = RerankWeights(conf["lambda_enc"] if mcfg.has_enc_rec else 0.0,
                                conf["lambda_dec"] if mcfg.has_dec_rec else 0.0)
    except ValueError as e:
        raise DataError(str(e)) from None
    workers = _workers(conf)
    if dry:
        return {"sentences": len(xs)}
    items = [(sv.encode(x), sv.encode(xh)) for x, xh in zip(xs, xhats)]
    results = _parallel_map(_rerank_one, items, workers, (params, mcfg, conf["beam"], conf["max_len"], weights))
    write_sentences(conf["out"], [tv.decode([t for t in best.tokens if t != EOS_ID]) for best, _ in results])
    if conf["kbest"]:
        write_lines(conf["kbest"], [line for n, (_, table) in enumerate(results) for line in format_kbest(n, table, tv)])
    write_effective_config(conf["out"] + ".config", "rerank", conf)
    return {"sentences": len(xs), "system": system, "lambda_enc": weights.lambda_enc,
            "lambda_dec": weights.lambda_dec, "workers": workers}


def cmd_evaluate(conf, dry):
    hyps, refs = _read_parallel(conf["hyp"], conf["ref"])
    if conf["baseline"]:
        _require(conf["baseline"])
        base = read_sentences(conf["baseline"])
        if len(base) != len(refs):
            raise DataError(f"{conf['baseline']} has {len(base)} lines for {len(refs)} references")
    if dry:
        return {"sentences": len(hyps)}
    res = corpus_bleu(hyps, refs)
    print(res.line())
    out = {"bleu": f"{res.score:.2f}", "sentences": len(hyps)}
    if conf["baseline"]:
        st = sign_test(hyps, base, refs)
        print("sign-test " + st.line())
        out.update(wins=st.wins, losses=st.losses, ties=st.ties, p=f"{st.p_value:.4g}", all_ties=int(st.all_ties))
    return out


def cmd_stats(conf, dry):
    _require(conf["data"] + ".x")
    labelled, ys = read_labelled(conf["data"])
    src_pron = read_inventory(_resource(conf["source_pronouns"]))
    tgt_pron = read_inventory(_resource(conf["target_pronouns"]))
    if dry:
        return {"sentences": len(labelled)}
    st = dp_rate_stats(labelled, ys, src_pron, tgt_pron)
    print(st.table())
    for line in st.records():
        print(line)
    return {"sentences": st.sentences, "dp_rate": f"{st.dp_rate:.6f}", "no_target_pronouns": int(st.no_target_pronouns)}


def cmd_gradcheck(conf, dry):
    variants = VARIANTS if conf["variant"] == "all" else (conf["variant"],)
    for v in variants:
        if v not in VARIANTS:
            raise DataError(f"unknown variant {v!r}")
    if dry:
        return {"variants": ",".join(variants)}
    worst = {}
    for v in variants:
        worst[v] = check_variant(v, seed=conf["seed"], epsilon=conf["epsilon"])
        print(f"{v}: max_rel_error={worst[v]:.3e}")
    failed = [v for v, e in worst.items() if not e < conf["tolerance"]]
    if failed:
        raise NumericError(f"gradient check failed for {', '.join(failed)}")
    return {"max_rel_error": f"{max(worst.values()):.3e}", "passed": 1}


HANDLERS = {
    "synth": cmd_synth, "align": cmd_align, "annotate": cmd_annotate, "train-dp": cmd_train_dp,
    "label": cmd_label, "train": cmd_train, "translate": cmd_translate, "rerank": cmd_rerank,
    "evaluate": cmd_evaluate, "stats": cmd_stats, "gradcheck": cmd_gradcheck,
}


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2), format="%(levelname)s %(message)s")
    cmd = ns.command
    try:
        conf = resolve(cmd, ns)
        fields = HANDLERS[cmd](conf, ns.dry_run)
    except (NumericError, FloatingPointError, TrainingError) as e:
        print(f"error: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, ValueError, OSError, KeyError) as e:
        print(f"error: invalid input: {e}", file=sys.stderr)
        return EXIT_DATA
    if ns.dry_run:
        fields = {"dry_run": 1, **fields}
    summary(cmd, **fields)
    return 0


if __name__ == "__main__":
    sys.exit(main())
