"""Finite-difference check of the full joint objective on a tiny random model."""

import numpy as np

from .autodiff import Graph, finite_diff_check
from .reconstructor import joint_loss_batch, make_batch
from .seq2seq import ModelConfig
from .training import init_params
from .vocab import EOS_ID


def random_triples(rng, n, vocab_size, max_len=5):
    """Random ``(x, y, x_hat)`` id triples; ``y`` and ``x_hat`` end with ``</s>``."""
    out = []
    for _ in range(n):
        x = list(rng.integers(4, vocab_size, rng.integers(1, max_len + 1)))
        y = list(rng.integers(4, vocab_size, rng.integers(1, max_len + 1))) + [EOS_ID]
        xh = list(rng.integers(4, vocab_size, rng.integers(1, max_len + 1))) + [EOS_ID]
        out.append(([int(t) for t in x], [int(t) for t in y], [int(t) for t in xh]))
    return out


def tiny_config(variant, vocab_size=20, dim=8, init_scale=1.0):
    return ModelConfig(vocab_size, vocab_size, dim, dim, dim, variant=variant, init_scale=init_scale)


def check_variant(variant, seed=0, batch=3, epsilon=1e-4, init_scale=1.0):
    """Max relative error between analytic and central-difference gradients.

    Parameters are drawn uniform in ``[-init_scale, init_scale]``; see the
    README for why the check does not use the small training init.
    """
    cfg = tiny_config(variant, init_scale=init_scale)
    rng = np.random.default_rng(seed)
    params = init_params(cfg, seed)
    g = Graph()
    total, _ = joint_loss_batch(g, params, cfg, make_batch(random_triples(rng, batch, cfg.source_vocab_size)))
    return finite_diff_check(g, total, epsilon=epsilon)
