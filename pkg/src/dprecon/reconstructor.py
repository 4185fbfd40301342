"""Reconstructors that regenerate the pronoun-labelled source from hidden states.

Two independent reconstructors exist: ``enc_rec/`` reads the encoder states
``h`` (dimension 2H) and ``dec_rec/`` reads the decoder states ``s``
(dimension H).  Each has its own attention, GRU and output layer; both embed
the labelled source tokens with the encoder's ``nmt/src_emb`` table, which is
never copied.
"""

import numpy as np

from .autodiff import Graph
from .seq2seq import (
    attend_keys,
    attend_step,
    check_ids,
    dropout_mask,
    gru_shapes,
    nll_batch,
    pad_batch,
    shift_right,
    uniform_init,
)
from .vocab import EOS_ID

ROLES = {"enc": "enc_rec/", "dec": "dec_rec/"}


def rec_shapes(cfg, role):
    prefix = ROLES[role]
    E, Hr = cfg.embedding_dim, cfg.rec_hidden_dim
    D = 2 * cfg.hidden_dim if role == "enc" else cfg.hidden_dim
    shapes = {
        prefix + "att/W": (Hr, Hr),
        prefix + "att/U": (D, Hr),
        prefix + "att/v": (Hr, 1),
        prefix + "init/W": (D, Hr),
        prefix + "init/b": (Hr,),
        prefix + "gru/Wy": (E, 3 * Hr),
        prefix + "gru/Wc": (D, 3 * Hr),
        prefix + "out/Ws": (Hr, E),
        prefix + "out/Wy": (E, E),
        prefix + "out/Wc": (D, E),
        prefix + "out/b": (E,),
        prefix + "out/Wo": (E, cfg.source_vocab_size),
        prefix + "out/bo": (cfg.source_vocab_size,),
    }
    gru = gru_shapes(prefix + "gru/", E, Hr)
    shapes[prefix + "gru/U_zr"] = gru[prefix + "gru/U_zr"]
    shapes[prefix + "gru/U_h"] = gru[prefix + "gru/U_h"]
    shapes[prefix + "gru/b"] = gru[prefix + "gru/b"]
    return shapes


def init_rec_params(cfg, role, seed=0):
    return uniform_init(rec_shapes(cfg, role), seed, cfg.init_scale)


def required_roles(cfg):
    roles = []
    if cfg.has_enc_rec:
        roles.append("enc")
    if cfg.has_dec_rec:
        roles.append("dec")
    return roles


def check_params(params, cfg):
    for role in required_roles(cfg):
        missing = [n for n in rec_shapes(cfg, role) if n not in params]
        if missing:
            raise ValueError(f"variant {cfg.variant} needs {ROLES[role]} parameters; missing {missing[:3]}...")


def reconstruct_batch(g, params, cfg, role, v, v_mask, xhat, xhat_mask, trace=None):
    """``-log R(xhat | v)`` per sentence as a (B,) tensor.

    ``v`` is a (B, T, D) tensor of hidden states with ``v_mask`` marking real
    positions.  When ``trace`` is a list it receives ``(s_hat, c_hat, alpha)``
    per step.
    """
    prefix = ROLES[role]
    check_ids(xhat, xhat_mask, cfg.source_vocab_size, "reconstruct")
    if v.shape[1] == 0:
        raise ValueError("reconstruct: empty representation sequence")
    P = lambda n: g.param(n, params[n])  # noqa: E731
    B, J = xhat.shape
    Hr = cfg.rec_hidden_dim
    vm = v_mask.astype(float)
    pooled = g.mul(g.sum(g.mul(v, vm[:, :, None]), axis=1), (1.0 / vm.sum(axis=1))[:, None])
    s = g.tanh(g.add(g.matmul(pooled, P(prefix + "init/W")), P(prefix + "init/b")))
    keys = attend_keys(g, params, prefix + "att/", v)
    x_in = shift_right(xhat, xhat_mask)
    emb = g.embedding(P("nmt/src_emb"), x_in)
    proj_y = g.add(g.matmul(emb, P(prefix + "gru/Wy")), P(prefix + "gru/b"))
    out_y = g.add(g.matmul(emb, P(prefix + "out/Wy")), P(prefix + "out/b"))
    nll = None
    for j in range(J):
        alpha, ctx = attend_step(g, params, prefix + "att/", s, keys, v, v_mask)
        x = g.add(g.getitem(proj_y, (slice(None), j)), g.matmul(ctx, P(prefix + "gru/Wc")))
        x_zr = g.getitem(x, (slice(None), slice(0, 2 * Hr)))
        x_h = g.getitem(x, (slice(None), slice(2 * Hr, 3 * Hr)))
        zr = g.sigmoid(g.add(x_zr, g.matmul(s, P(prefix + "gru/U_zr"))))
        z = g.getitem(zr, (slice(None), slice(0, Hr)))
        r = g.getitem(zr, (slice(None), slice(Hr, 2 * Hr)))
        cand = g.tanh(g.add(x_h, g.matmul(g.mul(r, s), P(prefix + "gru/U_h"))))
        s = g.add(s, g.mul(z, g.sub(cand, s)))
        pre = g.add(g.add(g.matmul(s, P(prefix + "out/Ws")), g.getitem(out_y, (slice(None), j))),
                    g.matmul(ctx, P(prefix + "out/Wc")))
        logits = g.add(g.matmul(g.tanh(pre), P(prefix + "out/Wo")), P(prefix + "out/bo"))
        if trace is not None:
            trace.append((s, ctx, alpha))
        step = g.mul(g.cross_entropy(logits, xhat[:, j]), xhat_mask[:, j].astype(float))
        nll = step if nll is None else g.add(nll, step)
    return nll


def reconstruct_log_score(v, x_hat, params, cfg, role):
    """``sum_j log R(x_hat_j | x_hat_<j, v)`` for one sentence.

    ``v`` is a (T, D) array of hidden states.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[0] == 0:
        raise ValueError("reconstruct: v must be a non-empty (T, D) array")
    x_hat = list(x_hat)
    if not x_hat or x_hat[-1] != EOS_ID:
        raise ValueError("reconstruct: x_hat must end with </s>")
    g = Graph(record=False)
    ids, mask = pad_batch([x_hat])
    nll = reconstruct_batch(g, params, cfg, role, g.constant(v[None]), np.ones((1, v.shape[0]), bool), ids, mask)
    return -float(nll.data[0])


def joint_loss_batch(g, params, cfg, batch, rng=None):
    """Negative joint objective for a padded batch, summed over sentences.

    ``batch`` is a dict with ``src, src_mask, tgt, tgt_mask, xhat, xhat_mask``.
    Returns ``(total, parts)``; ``parts`` maps ``likelihood``/``enc_rec``/
    ``dec_rec`` to scalar tensors, only for the terms the variant uses.
    """
    check_params(params, cfg)
    nll, enc, trace = nll_batch(g, params, cfg, batch["src"], batch["src_mask"], batch["tgt"], batch["tgt_mask"], rng)
    parts = {"likelihood": g.sum(nll)}
    if cfg.has_enc_rec:
        rec = reconstruct_batch(g, params, cfg, "enc", enc.h, batch["src_mask"], batch["xhat"], batch["xhat_mask"])
        parts["enc_rec"] = g.sum(rec)
    if cfg.has_dec_rec:
        s = g.stack(trace.s, axis=1)
        rec = reconstruct_batch(g, params, cfg, "dec", s, batch["tgt_mask"], batch["xhat"], batch["xhat_mask"])
        parts["dec_rec"] = g.sum(rec)
    total = None
    for name in ("likelihood", "enc_rec", "dec_rec"):
        if name in parts:
            total = parts[name] if total is None else g.add(total, parts[name])
    return total, parts


def make_batch(triples):
    """Pad a list of ``(x, y, x_hat)`` id triples; ``y`` and ``x_hat`` end with ``</s>``."""
    src, src_mask = pad_batch([t[0] for t in triples])
    tgt, tgt_mask = pad_batch([t[1] for t in triples])
    xhat, xhat_mask = pad_batch([t[2] for t in triples])
    return {"src": src, "src_mask": src_mask, "tgt": tgt, "tgt_mask": tgt_mask,
            "xhat": xhat, "xhat_mask": xhat_mask}


def joint_loss(triple, params, cfg):
    """Joint loss of one ``(x, y, x_hat)`` triple: ``(total, parts)`` as floats."""
    x, y, x_hat = triple
    if not y or y[-1] != EOS_ID or not x_hat or x_hat[-1] != EOS_ID:
        raise ValueError("joint_loss: y and x_hat must end with </s>")
    g = Graph(record=False)
    total, parts = joint_loss_batch(g, params, cfg, make_batch([triple]))
    return float(total.data), {k: float(v.data) for k, v in parts.items()}


__all__ = [
    "ROLES",
    "rec_shapes",
    "init_rec_params",
    "reconstruct_batch",
    "reconstruct_log_score",
    "joint_loss_batch",
    "joint_loss",
    "make_batch",
    "dropout_mask",
]
