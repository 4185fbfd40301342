import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dprecon import checkpoint
from dprecon.seq2seq import ModelConfig, init_nmt_params, log_likelihood
from dprecon.training import (
    Adadelta,
    TrainConfig,
    TrainingError,
    adadelta_update,
    clip_global_norm,
    corpus_likelihood,
    init_from_baseline,
    init_params,
    length_batches,
    train,
)
from dprecon.vocab import EOS_ID


def test_config_validation():
    for bad in ({"batch_size": 0}, {"adadelta_rho": 1.0}, {"adadelta_eps": 0.0}, {"epochs": -1}):
        with pytest.raises(ValueError):
            TrainConfig(**bad)


def test_zero_gradient_leaves_params_and_decays_state():
    params = {"w": np.array([1.0, -2.0])}
    state = {"w": (np.array([0.4, 0.2]), np.array([0.1, 0.3]))}
    new, st_ = adadelta_update(params, {"w": np.zeros(2)}, state)
    assert np.array_equal(new["w"], params["w"])
    assert np.allclose(st_["w"][0], [0.38, 0.19], rtol=0, atol=1e-15)
    assert np.allclose(st_["w"][1], [0.095, 0.285], rtol=0, atol=1e-15)


def test_adadelta_on_square_matches_scalar_recurrence():
    rho, eps = 0.95, 1e-6
    w, eg, ed, trace = 1.0, 0.0, 0.0, []
    for _ in range(200):
        g = 2 * w
        eg = rho * eg + (1 - rho) * g * g
        dx = -((ed + eps) ** 0.5) / ((eg + eps) ** 0.5) * g
        ed = rho * ed + (1 - rho) * dx * dx
        w += dx
        trace.append(w)
    params, opt, got = {"w": np.array([1.0])}, Adadelta(rho, eps), []
    for _ in range(200):
        opt.update(params, {"w": 2 * params["w"]})
        got.append(float(params["w"][0]))
    assert np.allclose(got, trace, rtol=0, atol=1e-14)
    mags = np.abs(got)
    assert (np.diff(mags) < 0).all()
    assert mags[-1] < 0.5


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(0, 3), st.floats(0, 3))
def test_identical_inputs_give_identical_updates(g, a, b):
    params = {"p": np.array([0.5]), "q": np.array([0.5])}
    state = {"p": (np.array([a]), np.array([b])), "q": (np.array([a]), np.array([b]))}
    new, st_ = adadelta_update(params, {"p": np.array([g]), "q": np.array([g])}, state)
    assert new["p"][0] == new["q"][0]
    assert (st_["p"][0] >= 0).all() and (st_["p"][1] >= 0).all()


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        Adadelta().update({"w": np.zeros(2)}, {"w": np.zeros(3)})


def test_clip_global_norm():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    assert clip_global_norm(grads, 1.0) == 5.0
    assert np.allclose([grads["a"][0], grads["b"][0]], [0.6, 0.8])
    small = {"a": np.array([0.1])}
    clip_global_norm(small, 1.0)
    assert small["a"][0] == 0.1


def test_length_batches_cover_everything_once():
    ex = [([4] * n, [5, EOS_ID], [4, EOS_ID]) for n in (1, 5, 2, 4, 3, 3, 1)]
    batches = length_batches(ex, 3, np.random.default_rng(0))
    flat = sorted(i for b in batches for i in b)
    assert flat == list(range(len(ex)))
    for b in batches:
        lens = [len(ex[i][0]) for i in b]
        assert max(lens) - min(lens) <= 2


def small_cfg(variant="Baseline", vocab=10, dim=8):
    return ModelConfig(vocab, vocab, dim, dim, dim, variant=variant, init_scale=0.1)


def copy_corpus(n, vocab=10, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = [int(t) for t in rng.integers(4, vocab, size=rng.integers(1, 4))]
        out.append((x, x + [EOS_ID], x + [EOS_ID]))
    return out


def test_forced_zero_gradients_leave_parameters_unchanged():
    cfg = small_cfg()
    start = init_params(cfg, 0)

    def zero(grads):
        for g in grads.values():
            g[...] = 0.0

    best, hist = train(copy_corpus(1), cfg, TrainConfig(epochs=1, batch_size=1), params=start, grad_hook=zero)
    assert len(hist) == 2
    for k in start:
        assert np.array_equal(best[k], start[k])


def test_training_is_bit_deterministic():
    cfg = small_cfg("Both")
    tcfg = TrainConfig(epochs=2, batch_size=4)
    data = copy_corpus(12)
    a, ha = train(data, cfg, tcfg, tune=[(x, y) for x, y, _ in data[:3]])
    b, hb = train(data, cfg, tcfg, tune=[(x, y) for x, y, _ in data[:3]])
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert [r.parts for r in ha] == [r.parts for r in hb]


def test_empty_corpus_and_nan_loss():
    cfg = small_cfg()
    with pytest.raises(ValueError):
        train([], cfg, TrainConfig(epochs=1))

    def poison(grads):
        grads["nmt/out/bo"][0] = np.nan

    with pytest.raises(TrainingError, match="epoch 1, batch 1"):
        train(copy_corpus(2), cfg, TrainConfig(epochs=1, batch_size=1), grad_hook=poison)


def test_copy_corpus_is_memorised():
    cfg = ModelConfig(10, 10, 16, 32, 16, init_scale=0.3)
    data = copy_corpus(200)
    _, hist = train(data, cfg, TrainConfig(epochs=30, batch_size=10))
    losses = [r.parts["likelihood"] for r in hist[1:]]
    assert losses[-1] < 0.1
    tail = losses[-10:]
    assert all(b <= a * 1.05 for a, b in zip(tail, tail[1:]))


def test_init_from_baseline_copies_theta_exactly():
    base_cfg = small_cfg()
    base = init_nmt_params(base_cfg, 9)
    same = init_from_baseline(base, base_cfg)
    assert set(same) == set(base) and all(np.array_equal(same[k], base[k]) for k in base)
    both = init_from_baseline(base, small_cfg("Both"))
    assert all(np.array_equal(both[k], base[k]) for k in base)
    rec = [k for k in both if k not in base]
    assert any(k.startswith("enc_rec/") for k in rec) and any(k.startswith("dec_rec/") for k in rec)
    assert all(np.abs(both[k]).max() <= 0.1 for k in rec)


def test_init_from_baseline_lists_missing_tensors():
    base = init_nmt_params(small_cfg(), 0)
    del base["nmt/att/v"], base["nmt/dec/b"]
    with pytest.raises(ValueError, match="nmt/att/v, nmt/dec/b"):
        init_from_baseline(base, small_cfg("EncRec"))


def test_stage_two_starts_from_baseline_likelihood():
    data = copy_corpus(20)
    pairs = [(x, y) for x, y, _ in data]
    base_cfg = small_cfg()
    base, _ = train(data, base_cfg, TrainConfig(epochs=2, batch_size=5))
    ll, ntok = corpus_likelihood(base, base_cfg, pairs)
    assert ll == pytest.approx(sum(log_likelihood(x, y, base, base_cfg) for x, y in pairs), abs=1e-10)
    cfg = small_cfg("Both")
    log = io.StringIO()
    _, hist = train(data, cfg, TrainConfig(epochs=1, batch_size=5), params=init_from_baseline(base, cfg),
                    log_fh=log)
    assert abs(hist[0].parts["likelihood"] - (-ll / ntok)) < 1e-10
    assert log.getvalue().startswith("epoch=0 ")


def test_best_epoch_checkpoint_written(tmp_path):
    data = copy_corpus(10)
    cfg = small_cfg()
    best, _ = train(data, cfg, TrainConfig(epochs=2, batch_size=5), tune=[(x, y) for x, y, _ in data],
                    out_dir=tmp_path)
    name = (tmp_path / "best").read_text().strip()
    stored = checkpoint.load(tmp_path / name)
    assert all(np.array_equal(stored[k], best[k]) for k in best)
    assert (tmp_path / "epoch000.ckpt").exists()
