import math

import numpy as np
import pytest

import reference as ref
from dprecon.autodiff import Graph
from dprecon.reconstructor import (
    init_rec_params,
    joint_loss,
    joint_loss_batch,
    make_batch,
    reconstruct_log_score,
    rec_shapes,
)
from dprecon.seq2seq import ModelConfig, encode, init_nmt_params, log_likelihood
from dprecon.vocab import EOS_ID


def model(variant, vocab=10, dim=4, seed=0):
    cfg = ModelConfig(vocab, vocab, dim, dim, dim, variant=variant, init_scale=0.5)
    params = init_nmt_params(cfg, seed)
    params.update(init_rec_params(cfg, "enc", seed + 1))
    params.update(init_rec_params(cfg, "dec", seed + 2))
    return cfg, params


TRIPLE = ([4, 5, 6], [7, 8, EOS_ID], [9, 4, 5, 6, EOS_ID])


def test_shapes_depend_on_role():
    cfg = ModelConfig(10, 11, 3, 5, 7)
    assert rec_shapes(cfg, "enc")["enc_rec/att/U"] == (10, 7)
    assert rec_shapes(cfg, "dec")["dec_rec/att/U"] == (5, 7)
    assert rec_shapes(cfg, "dec")["dec_rec/out/Wo"] == (3, 10)
    assert not any(k.endswith("emb") for k in rec_shapes(cfg, "enc"))


def test_joint_loss_decomposes_into_parts():
    cfg, p = model("Both")
    total, parts = joint_loss(TRIPLE, p, cfg)
    assert set(parts) == {"likelihood", "enc_rec", "dec_rec"}
    assert total == pytest.approx(sum(parts.values()), abs=1e-12)
    assert parts["likelihood"] == pytest.approx(-log_likelihood(TRIPLE[0], TRIPLE[1], p, cfg), abs=1e-12)


@pytest.mark.parametrize("variant,keys", [("Baseline", {"likelihood"}), ("EncRec", {"likelihood", "enc_rec"}),
                                          ("DecRec", {"likelihood", "dec_rec"})])
def test_variant_selects_terms(variant, keys):
    cfg, p = model(variant)
    assert set(joint_loss(TRIPLE, p, cfg)[1]) == keys


def test_missing_reconstructor_params_rejected():
    cfg, p = model("EncRec")
    p = {k: v for k, v in p.items() if not k.startswith("enc_rec/")}
    with pytest.raises(ValueError, match="enc_rec"):
        joint_loss(TRIPLE, p, cfg)


def test_zero_output_layer_gives_uniform_reconstruction():
    cfg, p = model("EncRec", vocab=13)
    p["enc_rec/out/Wo"][:] = 0.0
    p["enc_rec/out/bo"][:] = 0.0
    v = encode(TRIPLE[0], p, cfg).h.data[0]
    score = reconstruct_log_score(v, TRIPLE[2], p, cfg, "enc")
    assert score == pytest.approx(-5 * math.log(13), abs=1e-12)


@pytest.mark.parametrize("length", [1, 4])
def test_encoder_reconstruction_matches_reference(length):
    cfg, p = model("EncRec", seed=3)
    x = [4, 5, 6, 7][:length]
    x_hat = [8] + x + [EOS_ID]
    hs, _ = ref.encode(p, x)
    got = reconstruct_log_score(hs, x_hat, p, cfg, "enc")
    assert got == pytest.approx(ref.reconstruct(p, "enc_rec/", hs, x_hat), abs=1e-10)


def test_decoder_reconstruction_matches_reference():
    cfg, p = model("DecRec", seed=4)
    x, y, x_hat = TRIPLE
    _, _, states = ref.log_likelihood(p, x, y)
    _, parts = joint_loss(TRIPLE, p, cfg)
    want = ref.reconstruct(p, "dec_rec/", states, x_hat)
    assert parts["dec_rec"] == pytest.approx(-want, abs=1e-10)


def test_reconstructors_are_independent():
    cfg, p = model("Both", seed=5)
    _, before = joint_loss(TRIPLE, p, cfg)
    q = dict(p)
    q["dec_rec/out/Wo"] = p["dec_rec/out/Wo"] * 3.0
    _, after = joint_loss(TRIPLE, q, cfg)
    assert after["enc_rec"] == before["enc_rec"]
    assert after["likelihood"] == before["likelihood"]
    assert after["dec_rec"] != before["dec_rec"]


def test_embedding_is_shared_and_encoder_gets_reconstruction_gradient():
    cfg, p = model("EncRec", seed=6)
    g = Graph()
    _, parts = joint_loss_batch(g, p, cfg, make_batch([TRIPLE]))
    grads = g.backward(parts["enc_rec"])
    # token 9 only occurs in x_hat, so its embedding gradient comes from the reconstructor
    assert np.abs(grads["nmt/src_emb"][9]).sum() > 0
    assert np.abs(grads["nmt/enc_fwd/W"]).sum() > 0
    assert not grads["nmt/tgt_emb"].any()


def test_reconstruction_needs_eos_and_states():
    cfg, p = model("EncRec")
    with pytest.raises(ValueError):
        reconstruct_log_score(np.ones((2, 8)), [4, 5], p, cfg, "enc")
    with pytest.raises(ValueError):
        reconstruct_log_score(np.ones((0, 8)), [4, EOS_ID], p, cfg, "enc")


def test_batched_loss_equals_sum_of_sentences():
    cfg, p = model("Both", seed=7)
    triples = [TRIPLE, ([5], [EOS_ID], [4, 5, EOS_ID]), ([6, 6, 7, 8], [4, 4, 4, 5, EOS_ID], [6, 6, 7, 8, EOS_ID])]
    total, _ = joint_loss_batch(Graph(record=False), p, cfg, make_batch(triples))
    assert float(total.data) == pytest.approx(sum(joint_loss(t, p, cfg)[0] for t in triples), abs=1e-10)
