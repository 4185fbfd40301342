"""Adadelta training, length-bucketed minibatches and two-stage fine-tuning."""

import logging
import os
import time
from dataclasses import dataclass

import numpy as np

from . import checkpoint
from .autodiff import Graph, NumericError
from .reconstructor import ROLES, init_rec_params, joint_loss_batch, make_batch, required_roles
from .seq2seq import init_nmt_params, nll_batch, pad_batch

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 80
    epochs: int = 20
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-6
    clip_norm: float = 1.0
    shuffle_seed: int = 1234
    max_length: int = 20
    init_seed: int = 0
    patience: int = 0  # 0 = run all epochs, keep the best one

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.adadelta_rho < 1.0:
            raise ValueError("adadelta_rho must be in (0, 1)")
        if self.adadelta_eps <= 0:
            raise ValueError("adadelta_eps must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


class Adadelta:
    """Per-parameter running averages of squared gradients and squared updates."""

    def __init__(self, rho=0.95, eps=1e-6):
        self.rho = rho
        self.eps = eps
        self.state = {}

    def update(self, params, grads):
        rho, eps = self.rho, self.eps
        for name, g in grads.items():
            p = params[name]
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape} for {name}")
            st = self.state.get(name)
            if st is None:
                st = self.state[name] = [np.zeros_like(p), np.zeros_like(p)]
            eg2, edx2 = st
            eg2 *= rho
            eg2 += (1.0 - rho) * g * g
            delta = -np.sqrt(edx2 + eps) / np.sqrt(eg2 + eps) * g
            edx2 *= rho
            edx2 += (1.0 - rho) * delta * delta
            p += delta


def adadelta_update(params, grads, state, rho=0.95, eps=1e-6):
    """Functional form: returns updated copies of ``params`` and ``state``.

    ``state`` maps name -> ``(E[g^2], E[dx^2])``; missing entries start at zero.
    """
    opt = Adadelta(rho, eps)
    opt.state = {k: [a.copy(), b.copy()] for k, (a, b) in state.items()}
    new_params = {k: v.copy() for k, v in params.items()}
    opt.update(new_params, grads)
    return new_params, {k: (a, b) for k, (a, b) in opt.state.items()}


def clip_global_norm(grads, max_norm):
    norm = float(np.sqrt(sum(float(np.vdot(g, g)) for g in grads.values())))
    if max_norm and norm > max_norm:
        factor = max_norm / norm
        for g in grads.values():
            g *= factor
    return norm


def length_batches(examples, batch_size, rng):
    """Group examples of similar source length into batches; batch order shuffled."""
    order = rng.permutation(len(examples))
    order = sorted(order, key=lambda i: (len(examples[i][0]), len(examples[i][1])))
    batches = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]
    perm = rng.permutation(len(batches))
    return [batches[i] for i in perm]


def filter_length(examples, max_length):
    """Drop examples whose source or target (without ``</s>``) exceeds ``max_length``."""
    return [ex for ex in examples if len(ex[0]) <= max_length and len(ex[1]) - 1 <= max_length]


def corpus_likelihood(params, cfg, pairs, batch_size=200):
    """Total log-likelihood and target token count of ``(x, y)`` id pairs."""
    total, tokens = 0.0, 0
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start:start + batch_size]
        src, src_mask = pad_batch([p[0] for p in chunk])
        tgt, tgt_mask = pad_batch([p[1] for p in chunk])
        nll, _, _ = nll_batch(Graph(record=False), params, cfg, src, src_mask, tgt, tgt_mask)
        total -= float(np.sum(nll.data))
        tokens += int(tgt_mask.sum())
    return total, tokens


def tune_metric(params, cfg, pairs):
    """Mean per-token log-likelihood (higher is better)."""
    ll, n = corpus_likelihood(params, cfg, pairs)
    return ll / max(n, 1)


def init_params(cfg, seed=0):
    params = init_nmt_params(cfg, seed)
    for role in required_roles(cfg):
        params.update(init_rec_params(cfg, role, seed + (1 if role == "enc" else 2)))
    return params


def init_from_baseline(baseline_params, cfg, seed=0):
    """Copy the encoder-decoder tensors and freshly initialise the reconstructors."""
    expected = init_nmt_params(cfg, seed)
    missing = sorted(n for n in expected if n not in baseline_params)
    if missing:
        raise ValueError(f"baseline checkpoint is missing tensors: {', '.join(missing)}")
    for n in expected:
        if baseline_params[n].shape != expected[n].shape:
            raise ValueError(f"{n}: baseline shape {baseline_params[n].shape} != {expected[n].shape}")
    params = {n: np.array(baseline_params[n], dtype=np.float64, copy=True) for n in expected}
    for role in required_roles(cfg):
        params.update(init_rec_params(cfg, role, seed + (1 if role == "enc" else 2)))
    return params


@dataclass
class EpochRecord:
    epoch: int
    batches: int
    parts: dict
    tune: float
    seconds: float

    def line(self):
        parts = " ".join(f"{k}={v:.6f}" for k, v in sorted(self.parts.items()))
        return f"epoch={self.epoch} batches={self.batches} {parts} tune={self.tune:.6f} time={self.seconds:.1f}"


def train(examples, cfg, tcfg, tune=None, params=None, out_dir=None, log_fh=None, grad_hook=None):
    """Train on ``(x, y, x_hat)`` id triples and return ``(best_params, history)``.

    ``tune`` is a list of ``(x, y)`` pairs used for model selection; the
    parameters with the best tuning metric (epoch 0 included) are returned.
    ``params`` seeds the run (e.g. from :func:`init_from_baseline`); the
    optimiser state always starts fresh.  ``grad_hook(grads)`` may edit
    gradients in place before the update.
    """
    if not examples:
        raise ValueError("empty training corpus")
    data = filter_length(examples, tcfg.max_length)
    if not data:
        raise ValueError("every example exceeds max_length")
    if params is None:
        params = init_params(cfg, tcfg.init_seed)
    params = {k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()}
    tune = tune or []
    rng = np.random.default_rng(tcfg.shuffle_seed)
    opt = Adadelta(tcfg.adadelta_rho, tcfg.adadelta_eps)
    history = []

    def emit(rec):
        history.append(rec)
        log.info(rec.line())
        if log_fh is not None:
            log_fh.write(rec.line() + "\n")
            log_fh.flush()

    def evaluate():
        return tune_metric(params, cfg, tune) if tune else float("nan")

    def save(epoch):
        if out_dir is None:
            return
        name = f"epoch{epoch:03d}.ckpt"
        checkpoint.save(os.path.join(out_dir, name), params)
        return name

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    start = time.perf_counter()
    ll, ntok = corpus_likelihood(params, cfg, [(x, y) for x, y, _ in data])
    best_metric = evaluate()
    emit(EpochRecord(0, 0, {"likelihood": -ll / ntok}, best_metric, time.perf_counter() - start))
    best = {k: v.copy() for k, v in params.items()}
    best_name = save(0)
    stale = 0
    for epoch in range(1, tcfg.epochs + 1):
        start = time.perf_counter()
        sums, ntok = {}, 0
        batches = length_batches(data, tcfg.batch_size, rng)
        for b, idx in enumerate(batches):
            batch = make_batch([data[i] for i in idx])
            g = Graph()
            try:
                total, parts = joint_loss_batch(g, params, cfg, batch, rng if cfg.dropout_rate > 0 else None)
            except (NumericError, FloatingPointError) as exc:
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {b}: {exc}") from exc
            if not np.isfinite(float(total.data)):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {b}")
            scale = 1.0 / len(idx)
            grads = {k: v * scale for k, v in g.backward(total).items()}
            if grad_hook is not None:
                grad_hook(grads)
            clip_global_norm(grads, tcfg.clip_norm)
            opt.update(params, grads)
            for k, v in parts.items():
                sums[k] = sums.get(k, 0.0) + float(v.data)
            ntok += int(batch["tgt_mask"].sum())
        metric = evaluate()
        emit(EpochRecord(epoch, len(batches), {k: v / ntok for k, v in sums.items()}, metric,
                         time.perf_counter() - start))
        name = save(epoch)
        if not tune or metric > best_metric:
            best_metric, best, best_name, stale = metric, {k: v.copy() for k, v in params.items()}, name, 0
        else:
            stale += 1
            if tcfg.patience and stale >= tcfg.patience:
                break
    if out_dir is not None:
        with open(os.path.join(out_dir, "best"), "w") as fh:
            fh.write(f"{best_name}\n")
        checkpoint.save(os.path.join(out_dir, "best.ckpt"), best)
    return best, history


__all__ = [
    "TrainConfig",
    "TrainingError",
    "Adadelta",
    "adadelta_update",
    "clip_global_norm",
    "length_batches",
    "corpus_likelihood",
    "tune_metric",
    "init_params",
    "init_from_baseline",
    "train",
    "ROLES",
]
