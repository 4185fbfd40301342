"""Loop-based numpy re-implementation of the model equations, used as a test oracle.

Nothing here touches the autodiff graph; every quantity is recomputed one
sentence and one position at a time.
"""

import numpy as np

BOS, EOS = 2, 3


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def softmax(x):
    e = np.exp(x - x.max())
    return e / e.sum()


def gru(x_proj, h, U_zr, U_h):
    """``x_proj`` is the already projected input ``x W + b``."""
    H = h.size
    zr = sigmoid(x_proj[: 2 * H] + h @ U_zr)
    z, r = zr[:H], zr[H:]
    cand = np.tanh(x_proj[2 * H:] + (r * h) @ U_h)
    return (1.0 - z) * h + z * cand


def encode(p, x):
    emb = p["nmt/src_emb"][x]
    H = p["nmt/enc_fwd/U_h"].shape[0]
    fwd, bwd = [], [None] * len(x)
    h = np.zeros(H)
    for e in emb:
        h = gru(e @ p["nmt/enc_fwd/W"] + p["nmt/enc_fwd/b"], h, p["nmt/enc_fwd/U_zr"], p["nmt/enc_fwd/U_h"])
        fwd.append(h)
    h = np.zeros(H)
    for j in range(len(x) - 1, -1, -1):
        h = gru(emb[j] @ p["nmt/enc_bwd/W"] + p["nmt/enc_bwd/b"], h, p["nmt/enc_bwd/U_zr"], p["nmt/enc_bwd/U_h"])
        bwd[j] = h
    return np.array([np.concatenate([f, b]) for f, b in zip(fwd, bwd)]), bwd[0]


def attend(q, values, W, U, v):
    energies = np.array([np.tanh(q @ W + vj @ U) @ v[:, 0] for vj in values])
    alpha = softmax(energies)
    return alpha, alpha @ values


def decoder_init(p, first_bwd):
    return np.tanh(first_bwd @ p["nmt/init/W"] + p["nmt/init/b"])


def decoder_step(p, hs, y_prev, s_prev):
    alpha, c = attend(s_prev, hs, p["nmt/att/W"], p["nmt/att/U"], p["nmt/att/v"])
    e = p["nmt/tgt_emb"][y_prev]
    s = gru(e @ p["nmt/dec/Wy"] + c @ p["nmt/dec/Wc"] + p["nmt/dec/b"], s_prev, p["nmt/dec/U_zr"], p["nmt/dec/U_h"])
    t = np.tanh(s @ p["nmt/out/Ws"] + e @ p["nmt/out/Wy"] + c @ p["nmt/out/Wc"] + p["nmt/out/b"])
    return s, softmax(t @ p["nmt/out/Wo"] + p["nmt/out/bo"]), alpha


def log_likelihood(p, x, y):
    hs, first = encode(p, x)
    s = decoder_init(p, first)
    total, prev, states = 0.0, BOS, []
    for tok in y:
        s, dist, _ = decoder_step(p, hs, prev, s)
        states.append(s)
        total += np.log(dist[tok])
        prev = tok
    return total, hs, np.array(states)


def reconstruct(p, prefix, v, x_hat):
    s = np.tanh(v.mean(axis=0) @ p[prefix + "init/W"] + p[prefix + "init/b"])
    total, prev = 0.0, BOS
    for tok in x_hat:
        _, c = attend(s, v, p[prefix + "att/W"], p[prefix + "att/U"], p[prefix + "att/v"])
        e = p["nmt/src_emb"][prev]
        s = gru(e @ p[prefix + "gru/Wy"] + c @ p[prefix + "gru/Wc"] + p[prefix + "gru/b"], s,
                p[prefix + "gru/U_zr"], p[prefix + "gru/U_h"])
        t = np.tanh(s @ p[prefix + "out/Ws"] + e @ p[prefix + "out/Wy"] + c @ p[prefix + "out/Wc"] + p[prefix + "out/b"])
        total += np.log(softmax(t @ p[prefix + "out/Wo"] + p[prefix + "out/bo"])[tok])
        prev = tok
    return total
