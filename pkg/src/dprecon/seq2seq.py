"""Attention-based GRU encoder-decoder.

Batched functions take a :class:`~dprecon.autodiff.Graph` first and work on
padded id matrices; the sentence-level helpers at the bottom of the module
wrap them with a non-recording graph and return plain numpy arrays.

Parameter layout (``H`` hidden, ``E`` embedding, ``A`` attention = ``H``)::

    nmt/src_emb (Vs, E)            nmt/tgt_emb (Vt, E)
    nmt/enc_fwd/{W (E,3H), U_zr (H,2H), U_h (H,H), b (3H)}   likewise enc_bwd
    nmt/init/{W (H,H), b (H)}      s0 = tanh(h_bwd[0] W + b)
    nmt/att/{W (H,A), U (2H,A), v (A,1)}
    nmt/dec/{Wy (E,3H), Wc (2H,3H), U_zr, U_h, b}
    nmt/out/{Ws (H,E), Wy (E,E), Wc (2H,E), b (E), Wo (E,Vt), bo (Vt)}

GRU gates are stored side by side as ``[z | r | candidate]``.
"""

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Graph
from .vocab import BOS_ID, EOS_ID, PAD_ID

VARIANTS = ("Baseline", "EncRec", "DecRec", "Both")


@dataclass(frozen=True)
class ModelConfig:
    source_vocab_size: int
    target_vocab_size: int
    embedding_dim: int = 620
    hidden_dim: int = 1000
    rec_hidden_dim: int = 1000
    max_train_length: int = 20
    dropout_rate: float = 0.0
    variant: str = "Baseline"
    init_scale: float = 0.08

    def __post_init__(self):
        dims = (self.source_vocab_size, self.target_vocab_size, self.embedding_dim,
                self.hidden_dim, self.rec_hidden_dim, self.max_train_length)
        if min(dims) <= 0:
            raise ValueError("all model dimensions must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    @property
    def has_enc_rec(self):
        return self.variant in ("EncRec", "Both")

    @property
    def has_dec_rec(self):
        return self.variant in ("DecRec", "Both")


def gru_shapes(prefix, in_dim, hidden):
    return {
        prefix + "W": (in_dim, 3 * hidden),
        prefix + "U_zr": (hidden, 2 * hidden),
        prefix + "U_h": (hidden, hidden),
        prefix + "b": (3 * hidden,),
    }


def nmt_shapes(cfg):
    E, H = cfg.embedding_dim, cfg.hidden_dim
    shapes = {
        "nmt/src_emb": (cfg.source_vocab_size, E),
        "nmt/tgt_emb": (cfg.target_vocab_size, E),
        "nmt/init/W": (H, H),
        "nmt/init/b": (H,),
        "nmt/att/W": (H, H),
        "nmt/att/U": (2 * H, H),
        "nmt/att/v": (H, 1),
        "nmt/dec/Wy": (E, 3 * H),
        "nmt/dec/Wc": (2 * H, 3 * H),
        "nmt/dec/U_zr": (H, 2 * H),
        "nmt/dec/U_h": (H, H),
        "nmt/dec/b": (3 * H,),
        "nmt/out/Ws": (H, E),
        "nmt/out/Wy": (E, E),
        "nmt/out/Wc": (2 * H, E),
        "nmt/out/b": (E,),
        "nmt/out/Wo": (E, cfg.target_vocab_size),
        "nmt/out/bo": (cfg.target_vocab_size,),
    }
    shapes.update(gru_shapes("nmt/enc_fwd/", E, H))
    shapes.update(gru_shapes("nmt/enc_bwd/", E, H))
    return shapes


def uniform_init(shapes, seed, scale):
    """Uniform(-scale, scale) init, drawn in sorted-name order."""
    rng = np.random.default_rng(seed)
    return {name: rng.uniform(-scale, scale, size=shapes[name]) for name in sorted(shapes)}


def init_nmt_params(cfg, seed=0):
    return uniform_init(nmt_shapes(cfg), seed, cfg.init_scale)


def pad_batch(seqs, pad_id=PAD_ID):
    """Right-pad integer sequences; returns ``(ids, mask)`` with mask as bool."""
    width = max(len(s) for s in seqs)
    ids = np.full((len(seqs), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(seqs), width), dtype=bool)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
        mask[i, : len(s)] = True
    return ids, mask


def shift_right(ids, mask, start_id=BOS_ID):
    """Decoder inputs: ``<s>`` followed by the gold prefix."""
    out = np.full_like(ids, PAD_ID)
    out[:, 0] = start_id
    out[:, 1:] = np.where(mask[:, :-1], ids[:, :-1], PAD_ID)
    return out


# ---------------------------------------------------------------------------
# graph building blocks
# ---------------------------------------------------------------------------


def gru_step(g, x_zr, x_h, h, U_zr, U_h, hidden, mask=None):
    """One GRU update from pre-projected inputs ``x W + b`` split as (zr, h)."""
    zr = g.sigmoid(g.add(x_zr, g.matmul(h, U_zr)))
    z = g.getitem(zr, (slice(None), slice(0, hidden)))
    r = g.getitem(zr, (slice(None), slice(hidden, 2 * hidden)))
    cand = g.tanh(g.add(x_h, g.matmul(g.mul(r, h), U_h)))
    new = g.add(h, g.mul(z, g.sub(cand, h)))
    if mask is not None:
        new = g.where(mask[:, None], new, h)
    return new


def run_gru(g, params, prefix, inputs, mask, hidden, reverse=False):
    """Run a GRU over ``inputs`` (B, T, D); padded steps carry the state through."""
    B, T = mask.shape
    proj = g.add(g.matmul(inputs, g.param(prefix + "W", params[prefix + "W"])),
                 g.param(prefix + "b", params[prefix + "b"]))
    p_zr = g.getitem(proj, (Ellipsis, slice(0, 2 * hidden)))
    p_h = g.getitem(proj, (Ellipsis, slice(2 * hidden, 3 * hidden)))
    U_zr = g.param(prefix + "U_zr", params[prefix + "U_zr"])
    U_h = g.param(prefix + "U_h", params[prefix + "U_h"])
    h = g.constant(np.zeros((B, hidden)))
    states = [None] * T
    order = range(T - 1, -1, -1) if reverse else range(T)
    for t in order:
        h = gru_step(g, g.getitem(p_zr, (slice(None), t)), g.getitem(p_h, (slice(None), t)),
                     h, U_zr, U_h, hidden, mask[:, t])
        states[t] = h
    return states


def attend_keys(g, params, prefix, values):
    return g.matmul(values, g.param(prefix + "U", params[prefix + "U"]))


def attend_step(g, params, prefix, query, keys, values, mask):
    """Additive attention; returns ``(alpha (B,T), context (B,D))``."""
    B, T, A = keys.shape
    q = g.reshape(g.matmul(query, g.param(prefix + "W", params[prefix + "W"])), (B, 1, A))
    e = g.tanh(g.add(keys, q))
    energies = g.reshape(g.matmul(e, g.param(prefix + "v", params[prefix + "v"])), (B, T))
    alpha = g.softmax(energies, mask)
    ctx = g.reshape(g.matmul(g.reshape(alpha, (B, 1, T)), values), (B, values.shape[-1]))
    return alpha, ctx


@dataclass
class EncoderStates:
    """Encoder output for a padded batch.

    ``h`` is (B, J, 2H): forward and backward GRU states concatenated per
    position.  ``keys`` caches the attention projection of ``h``.
    """

    h: object
    mask: np.ndarray
    first_backward: object
    keys: object = None

    @property
    def lengths(self):
        return self.mask.sum(axis=1)


@dataclass
class DecoderTrace:
    s: list = field(default_factory=list)
    c: list = field(default_factory=list)
    alpha: list = field(default_factory=list)


def check_ids(ids, mask, vocab_size, what):
    if ids.shape[1] == 0 or not mask.any(axis=1).all():
        raise ValueError(f"{what}: empty sequence")
    real = ids[mask]
    if real.size and (real.min() < 0 or real.max() >= vocab_size):
        raise ValueError(f"{what}: token id out of range [0, {vocab_size})")


def encode_batch(g, params, cfg, src, src_mask):
    check_ids(src, src_mask, cfg.source_vocab_size, "encode")
    H = cfg.hidden_dim
    emb = g.embedding(g.param("nmt/src_emb", params["nmt/src_emb"]), src)
    fwd = run_gru(g, params, "nmt/enc_fwd/", emb, src_mask, H)
    bwd = run_gru(g, params, "nmt/enc_bwd/", emb, src_mask, H, reverse=True)
    h = g.stack([g.concat([f, b], axis=-1) for f, b in zip(fwd, bwd)], axis=1)
    enc = EncoderStates(h=h, mask=src_mask, first_backward=bwd[0])
    enc.keys = attend_keys(g, params, "nmt/att/", h)
    return enc


def initial_decoder_state(g, params, enc):
    return g.tanh(g.add(g.matmul(enc.first_backward, g.param("nmt/init/W", params["nmt/init/W"])),
                        g.param("nmt/init/b", params["nmt/init/b"])))


def decoder_step(g, params, cfg, enc, y_prev_emb, s_prev, dropout_mask=None):
    """Attend with ``s_prev``, update the GRU, and produce output logits.

    Returns ``(s, logits, alpha, context)``.
    """
    H = cfg.hidden_dim
    P = lambda n: g.param(n, params[n])  # noqa: E731
    alpha, ctx = attend_step(g, params, "nmt/att/", s_prev, enc.keys, enc.h, enc.mask)
    x = g.add(g.add(g.matmul(y_prev_emb, P("nmt/dec/Wy")), g.matmul(ctx, P("nmt/dec/Wc"))), P("nmt/dec/b"))
    x_zr = g.getitem(x, (slice(None), slice(0, 2 * H)))
    x_h = g.getitem(x, (slice(None), slice(2 * H, 3 * H)))
    s = gru_step(g, x_zr, x_h, s_prev, P("nmt/dec/U_zr"), P("nmt/dec/U_h"), H)
    pre = g.add(g.add(g.matmul(s, P("nmt/out/Ws")), g.matmul(y_prev_emb, P("nmt/out/Wy"))),
                g.add(g.matmul(ctx, P("nmt/out/Wc")), P("nmt/out/b")))
    readout = g.tanh(pre)
    if dropout_mask is not None:
        readout = g.mul(readout, dropout_mask)
    logits = g.add(g.matmul(readout, P("nmt/out/Wo")), P("nmt/out/bo"))
    return s, logits, alpha, ctx


def dropout_mask(rng, shape, rate):
    if rng is None or rate <= 0.0:
        return None
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def decode_teacher(g, params, cfg, enc, tgt, tgt_mask, rng=None):
    """Teacher-forced decoding of ``tgt`` (B, I), which must end with ``</s>``.

    Returns ``(nll, trace)`` where ``nll`` is a (B,) tensor of
    ``-log P(y | x)`` per sentence.
    """
    check_ids(tgt, tgt_mask, cfg.target_vocab_size, "decode")
    B, I = tgt.shape
    y_in = shift_right(tgt, tgt_mask)
    emb = g.embedding(g.param("nmt/tgt_emb", params["nmt/tgt_emb"]), y_in)
    s = initial_decoder_state(g, params, enc)
    trace = DecoderTrace()
    nll = None
    for i in range(I):
        drop = dropout_mask(rng, (B, cfg.embedding_dim), cfg.dropout_rate)
        s, logits, alpha, ctx = decoder_step(g, params, cfg, enc, g.getitem(emb, (slice(None), i)), s, drop)
        trace.s.append(s)
        trace.c.append(ctx)
        trace.alpha.append(alpha)
        step = g.mul(g.cross_entropy(logits, tgt[:, i]), tgt_mask[:, i].astype(float))
        nll = step if nll is None else g.add(nll, step)
    return nll, trace


def nll_batch(g, params, cfg, src, src_mask, tgt, tgt_mask, rng=None):
    enc = encode_batch(g, params, cfg, src, src_mask)
    nll, trace = decode_teacher(g, params, cfg, enc, tgt, tgt_mask, rng)
    return nll, enc, trace


# ---------------------------------------------------------------------------
# sentence-level API (inference, numpy in / numpy out)
# ---------------------------------------------------------------------------


def _single(seq, what):
    seq = list(seq)
    if not seq:
        raise ValueError(f"{what}: empty sequence")
    return pad_batch([seq])


def encode(x, params, cfg):
    """Encode one source sentence; returns :class:`EncoderStates` with arrays."""
    ids, mask = _single(x, "encode")
    g = Graph(record=False)
    return encode_batch(g, params, cfg, ids, mask)


def attend(s_prev, enc, params):
    """Attention of decoder state ``s_prev`` (H,) over one sentence's encoder states."""
    g = Graph(record=False)
    alpha, ctx = attend_step(g, params, "nmt/att/", g.constant(np.atleast_2d(s_prev)), enc.keys, enc.h, enc.mask)
    return alpha.data[0], ctx.data[0]


def initial_state(enc, params):
    return initial_decoder_state(Graph(record=False), params, enc).data[0]


def decode_step(y_prev, s_prev, enc, params, cfg):
    """One decoder step for a single sentence: returns ``(s, dist, alpha)``."""
    if not 0 <= y_prev < cfg.target_vocab_size:
        raise ValueError(f"decode_step: token id {y_prev} out of range")
    g = Graph(record=False)
    y_emb = g.embedding(g.param("nmt/tgt_emb", params["nmt/tgt_emb"]), np.array([y_prev]))
    s, logits, alpha, _ = decoder_step(g, params, cfg, enc, y_emb, g.constant(np.atleast_2d(s_prev)))
    dist = g.softmax(logits).data[0]
    return s.data[0], dist, alpha.data[0]


def log_likelihood(x, y, params, cfg):
    """``sum_i log P(y_i | y_<i, x)`` under teacher forcing; ``y`` ends with ``</s>``."""
    y = list(y)
    if not y or y[-1] != EOS_ID:
        raise ValueError("log_likelihood: target must end with </s>")
    src, src_mask = _single(x, "encode")
    tgt, tgt_mask = pad_batch([y])
    nll, _, _ = nll_batch(Graph(record=False), params, cfg, src, src_mask, tgt, tgt_mask)
    return -float(nll.data[0])
