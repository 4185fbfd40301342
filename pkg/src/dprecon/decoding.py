"""Beam search and reconstruction-based reranking of k-best lists.

Scoring conventions:

* hypotheses are compared by length-normalised log-likelihood,
  ``log P(y|x) / |y|`` with ``|y|`` counting the final ``</s>``;
* reconstruction scores entering a rerank are normalised by ``|x_hat|``
  (again counting ``</s>``);
* a search of ``max_len`` steps may only emit ``</s>`` at the last step, so
  every returned hypothesis has at most ``max_len`` tokens.
"""

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Graph, Tensor
from .reconstructor import reconstruct_batch
from .seq2seq import (
    EncoderStates,
    decode_teacher,
    decoder_step,
    encode_batch,
    initial_decoder_state,
    pad_batch,
)
from .vocab import BOS_ID, EOS_ID

# exp() underflows to exactly 0 below this; such continuations are impossible
_MIN_LOGP = -745.0


@dataclass
class Hypothesis:
    tokens: list
    log_likelihood: float
    state: np.ndarray = field(default=None, repr=False)
    finished: bool = False

    @property
    def score(self):
        return self.log_likelihood / max(len(self.tokens), 1)


@dataclass(frozen=True)
class RerankWeights:
    lambda_enc: float = 1.0
    lambda_dec: float = 1.0

    def __post_init__(self):
        if self.lambda_enc < 0 or self.lambda_dec < 0:
            raise ValueError("rerank weights must be non-negative")


def _log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out[out < _MIN_LOGP] = -np.inf
    return out


def _expand(enc, n):
    return EncoderStates(
        h=Tensor(np.repeat(enc.h.data, n, axis=0)),
        mask=np.repeat(enc.mask, n, axis=0),
        first_backward=Tensor(np.repeat(enc.first_backward.data, n, axis=0)),
        keys=Tensor(np.repeat(enc.keys.data, n, axis=0)),
    )


def beam_search(x, params, cfg, beam_size=10, max_len=50):
    """Return up to ``beam_size`` finished hypotheses, best first.

    At each step every live hypothesis is extended by every token and the
    ``beam_size - len(finished)`` best extensions (by summed log-probability;
    all extensions have equal length) survive.  Extensions ending in
    ``</s>`` move to the finished pool.
    """
    if beam_size < 1 or max_len < 1:
        raise ValueError("beam_size and max_len must be >= 1")
    g = Graph(record=False)
    src, src_mask = pad_batch([list(x)])
    enc = encode_batch(g, params, cfg, src, src_mask)
    emb_table = g.param("nmt/tgt_emb", params["nmt/tgt_emb"])
    s0 = initial_decoder_state(g, params, enc).data[0]
    alive = [Hypothesis([], 0.0, s0)]
    finished = []
    for step in range(1, max_len + 1):
        n = len(alive)
        enc_b = _expand(enc, n)
        y_prev = np.array([h.tokens[-1] if h.tokens else BOS_ID for h in alive])
        s_prev = Tensor(np.stack([h.state for h in alive]))
        s, logits, _, _ = decoder_step(g, params, cfg, enc_b, g.embedding(emb_table, y_prev), s_prev)
        logp = _log_softmax(logits.data)
        if step == max_len:
            forced = np.full_like(logp, -np.inf)
            forced[:, EOS_ID] = logp[:, EOS_ID]
            logp = forced
        cand = np.array([h.log_likelihood for h in alive])[:, None] + logp
        flat = cand.reshape(-1)
        order = np.argsort(-flat, kind="stable")
        room = beam_size - len(finished)
        new_alive = []
        for idx in order[:room]:
            score = flat[idx]
            if score == -np.inf:
                break
            b, tok = divmod(int(idx), logp.shape[1])
            hyp = Hypothesis(alive[b].tokens + [tok], float(score), s.data[b])
            if tok == EOS_ID:
                hyp.finished = True
                finished.append(hyp)
            else:
                new_alive.append(hyp)
        alive = new_alive
        if not alive or len(finished) >= beam_size:
            break
    finished.sort(key=lambda h: -h.score)
    return finished[:beam_size]


def greedy_decode(x, params, cfg, max_len=50):
    """Step-wise argmax decoding (reference behaviour for ``beam_size=1``)."""
    g = Graph(record=False)
    src, src_mask = pad_batch([list(x)])
    enc = encode_batch(g, params, cfg, src, src_mask)
    emb_table = g.param("nmt/tgt_emb", params["nmt/tgt_emb"])
    s = initial_decoder_state(g, params, enc)
    tokens, ll = [], 0.0
    for step in range(1, max_len + 1):
        y_prev = tokens[-1] if tokens else BOS_ID
        s, logits, _, _ = decoder_step(g, params, cfg, enc, g.embedding(emb_table, np.array([y_prev])), s)
        logp = _log_softmax(logits.data)[0]
        tok = EOS_ID if step == max_len else int(np.argmax(logp))
        tokens.append(tok)
        ll += float(logp[tok])
        if tok == EOS_ID:
            break
    return Hypothesis(tokens, ll, finished=True)


def dedupe(kbest):
    seen, out = set(), []
    for h in kbest:
        key = tuple(h.tokens)
        if key not in seen:
            seen.add(key)
            out.append(h)
    return out


def reconstruction_scores(kbest, x, x_hat, params, cfg):
    """Length-normalised ``log R_enc`` (one value) and ``log R_dec`` per candidate.

    Missing reconstructors yield ``None``.
    """
    x_hat = list(x_hat)
    if not x_hat or x_hat[-1] != EOS_ID:
        x_hat = x_hat + [EOS_ID]
    g = Graph(record=False)
    src, src_mask = pad_batch([list(x)])
    enc = encode_batch(g, params, cfg, src, src_mask)
    xh, xh_mask = pad_batch([x_hat])
    enc_score = None
    if cfg.has_enc_rec:
        nll = reconstruct_batch(g, params, cfg, "enc", enc.h, src_mask, xh, xh_mask)
        enc_score = -float(nll.data[0]) / len(x_hat)
    dec_scores = None
    if cfg.has_dec_rec and kbest:
        k = len(kbest)
        tgt, tgt_mask = pad_batch([h.tokens for h in kbest])
        _, trace = decode_teacher(g, params, cfg, _expand(enc, k), tgt, tgt_mask)
        s = g.stack(trace.s, axis=1)
        nll = reconstruct_batch(g, params, cfg, "dec", s, tgt_mask,
                                np.repeat(xh, k, axis=0), np.repeat(xh_mask, k, axis=0))
        dec_scores = [-float(v) / len(x_hat) for v in nll.data]
    return enc_score, dec_scores


def score_table(kbest, x, x_hat, params, cfg):
    """Per-candidate components used by :func:`select_best`."""
    enc_score, dec_scores = reconstruction_scores(kbest, x, x_hat, params, cfg)
    return [
        {
            "rank": r,
            "tokens": list(h.tokens),
            "log_likelihood": h.log_likelihood,
            "likelihood": h.score,
            "enc_rec": enc_score,
            "dec_rec": None if dec_scores is None else dec_scores[r],
        }
        for r, h in enumerate(kbest)
    ]


def interpolate(likelihood, enc_rec, dec_rec, weights):
    """Overall score; absent terms must carry zero weight."""
    total = likelihood
    if weights.lambda_enc:
        if enc_rec is None:
            raise ValueError("lambda_enc > 0 but the model has no encoder-side reconstructor")
        total += weights.lambda_enc * enc_rec
    if weights.lambda_dec:
        if dec_rec is None:
            raise ValueError("lambda_dec > 0 but the model has no decoder-side reconstructor")
        total += weights.lambda_dec * dec_rec
    return total


def select_best(table, weights):
    """Index of the highest overall score; ties go to the better-ranked candidate."""
    scores = [interpolate(r["likelihood"], r["enc_rec"], r["dec_rec"], weights) for r in table]
    for row, sc in zip(table, scores):
        row["overall"] = sc
    return int(np.argmax(scores))


def rerank(kbest, x, x_hat, params, cfg, weights):
    """Pick the candidate maximising likelihood + weighted reconstruction scores.

    Returns ``(best_hypothesis, table)``.
    """
    if weights.lambda_enc and not cfg.has_enc_rec:
        raise ValueError("lambda_enc > 0 but the model has no encoder-side reconstructor")
    if weights.lambda_dec and not cfg.has_dec_rec:
        raise ValueError("lambda_dec > 0 but the model has no decoder-side reconstructor")
    kbest = dedupe(kbest)
    table = score_table(kbest, x, x_hat, params, cfg)
    best = select_best(table, weights)
    return kbest[best], table


def format_kbest(sent_index, table, vocab):
    """Tab-separated k-best lines: index, rank, log-likelihood, enc, dec, tokens."""
    lines = []
    for row in table:
        enc = "-" if row["enc_rec"] is None else f"{row['enc_rec']:.6f}"
        dec = "-" if row["dec_rec"] is None else f"{row['dec_rec']:.6f}"
        words = " ".join(vocab.decode(row["tokens"]))
        lines.append(f"{sent_index}\t{row['rank']}\t{row['log_likelihood']:.6f}\t{enc}\t{dec}\t{words}")
    return lines
