import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from dprecon.decoding import (
    Hypothesis,
    RerankWeights,
    beam_search,
    dedupe,
    format_kbest,
    greedy_decode,
    interpolate,
    rerank,
    score_table,
    select_best,
)
from dprecon.reconstructor import init_rec_params
from dprecon.seq2seq import ModelConfig, init_nmt_params, log_likelihood
from dprecon.vocab import EOS_ID, Vocabulary


def model(variant="Baseline", src=10, tgt=12, dim=6, seed=0, scale=1.0):
    cfg = ModelConfig(src, tgt, dim, dim, dim, variant=variant, init_scale=scale)
    p = init_nmt_params(cfg, seed)
    p.update(init_rec_params(cfg, "enc", seed + 1))
    p.update(init_rec_params(cfg, "dec", seed + 2))
    return cfg, p


def ref_score(p, x, y):
    return ref.log_likelihood(p, x, y)[0] / len(y)


@pytest.mark.parametrize("seed", range(5))
def test_beam_matches_exhaustive_enumeration(seed):
    cfg, p = model(tgt=4, seed=seed, scale=2.0)
    x = [4, 5, 6]
    cands = [list(pre) + [EOS_ID] for n in range(3) for pre in itertools.product((0, 1, 2), repeat=n)]
    scored = {tuple(y): ref_score(p, x, y) for y in cands}
    best = max(scored, key=scored.get)
    kbest = beam_search(x, p, cfg, beam_size=64, max_len=3)
    assert tuple(kbest[0].tokens) == best
    assert kbest[0].score == pytest.approx(scored[best], abs=1e-10)
    assert len(kbest) == len(cands)


@pytest.mark.parametrize("seed", range(6))
def test_beam_one_equals_greedy(seed):
    cfg, p = model(seed=seed)
    for x in ([4], [5, 6, 7], [9, 8, 7, 6]):
        (h,) = beam_search(x, p, cfg, beam_size=1, max_len=8)
        g = greedy_decode(x, p, cfg, max_len=8)
        assert h.tokens == g.tokens
        assert h.log_likelihood == pytest.approx(g.log_likelihood, abs=1e-12)


def test_deterministic_model_gives_zero_log_likelihood():
    cfg, p = model()
    p["nmt/out/Wo"][:] = 0.0
    p["nmt/out/bo"][:] = 0.0
    p["nmt/out/bo"][EOS_ID] = 1000.0
    kbest = beam_search([4, 5], p, cfg, beam_size=5, max_len=6)
    assert len(kbest) == 1
    assert kbest[0].tokens == [EOS_ID]
    assert kbest[0].log_likelihood == 0.0


def test_hypotheses_finish_and_scores_are_consistent():
    cfg, p = model(seed=3)
    x = [4, 6, 8]
    kbest = beam_search(x, p, cfg, beam_size=6, max_len=4)
    scores = [h.score for h in kbest]
    assert scores == sorted(scores, reverse=True)
    for h in kbest:
        assert h.tokens[-1] == EOS_ID and EOS_ID not in h.tokens[:-1]
        assert len(h.tokens) <= 4 and h.log_likelihood <= 0
        assert h.log_likelihood == pytest.approx(log_likelihood(x, h.tokens, p, cfg), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.lists(st.integers(4, 9), min_size=1, max_size=4), st.sampled_from([1, 2, 4, 8]))
def test_beam_output_is_well_formed(seed, x, k):
    # a wider beam can still prune the greedy path, so only per-beam invariants hold
    cfg, p = model(seed=seed)
    kbest = beam_search(x, p, cfg, beam_size=k, max_len=5)
    assert 1 <= len(kbest) <= k
    assert [h.score for h in kbest] == sorted((h.score for h in kbest), reverse=True)
    assert len({tuple(h.tokens) for h in kbest}) == len(kbest)
    for h in kbest:
        assert h.tokens[-1] == EOS_ID and EOS_ID not in h.tokens[:-1] and len(h.tokens) <= 5
        assert h.score == pytest.approx(ref_score(p, x, h.tokens), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000))
def test_beam_wide_enough_to_keep_every_prefix_is_exact(seed):
    # 3 real tokens, max_len 3: at most 9 live prefixes, so any beam of 9+ is exhaustive
    cfg, p = model(tgt=4, seed=seed, scale=2.0)
    tops = [beam_search([4, 5], p, cfg, beam_size=k, max_len=3)[0] for k in (9, 16, 64)]
    assert len({tuple(h.tokens) for h in tops}) == 1
    assert len({h.score for h in tops}) == 1


def test_beam_argument_validation():
    cfg, p = model()
    with pytest.raises(ValueError):
        beam_search([4], p, cfg, beam_size=0)
    with pytest.raises(ValueError):
        beam_search([4], p, cfg, max_len=0)


def test_rerank_hand_arithmetic():
    table = [{"likelihood": a, "enc_rec": None, "dec_rec": d} for a, d in ((-1, -5), (-2, -1), (-3, -4))]
    assert select_best(table, RerankWeights(0.0, 1.0)) == 1
    assert [r["overall"] for r in table] == [-6, -3, -7]
    assert select_best(table, RerankWeights(0.0, 0.0)) == 0


def test_interpolate_requires_present_terms():
    assert interpolate(-1.0, -2.0, -4.0, RerankWeights(0.5, 0.25)) == -3.0
    assert interpolate(-1.0, None, None, RerankWeights(0.0, 0.0)) == -1.0
    with pytest.raises(ValueError):
        interpolate(-1.0, None, -1.0, RerankWeights(1.0, 0.0))
    with pytest.raises(ValueError):
        RerankWeights(-0.1, 0.0)


def test_rerank_rejects_weights_for_absent_reconstructor():
    cfg, p = model("EncRec")
    kbest = beam_search([4, 5], p, cfg, beam_size=3, max_len=4)
    with pytest.raises(ValueError):
        rerank(kbest, [4, 5], [4, 5], p, cfg, RerankWeights(0.0, 1.0))


def test_zero_weights_keep_order_and_encoder_score_is_shared():
    cfg, p = model("Both", seed=2)
    x, x_hat = [4, 5, 6], [7, 4, 5, 6]
    kbest = beam_search(x, p, cfg, beam_size=6, max_len=5)
    best, table = rerank(kbest, x, x_hat, p, cfg, RerankWeights(0.0, 0.0))
    assert best.tokens == kbest[0].tokens
    assert [r["rank"] for r in table] == sorted(r["rank"] for r in table)
    assert len({r["enc_rec"] for r in table}) == 1
    for lam in (0.5, 3.0, 100.0):
        best, _ = rerank(kbest, x, x_hat, p, cfg, RerankWeights(lam, 0.0))
        assert best.tokens == kbest[0].tokens


def test_decoder_scores_match_reference():
    cfg, p = model("DecRec", seed=4)
    x, x_hat = [4, 5], [6, 4, 5, EOS_ID]
    kbest = beam_search(x, p, cfg, beam_size=3, max_len=4)
    table = score_table(kbest, x, x_hat, p, cfg)
    for row in table:
        _, _, states = ref.log_likelihood(p, x, row["tokens"])
        want = ref.reconstruct(p, "dec_rec/", states, x_hat) / len(x_hat)
        assert row["dec_rec"] == pytest.approx(want, abs=1e-10)
        assert row["enc_rec"] is None


def test_dedupe_and_format():
    a, b = Hypothesis([5, EOS_ID], -1.0), Hypothesis([5, EOS_ID], -2.0)
    assert dedupe([a, b, Hypothesis([EOS_ID], -3.0)]) == [a, Hypothesis([EOS_ID], -3.0)]
    vocab = Vocabulary(["x", "y"])
    row = {"rank": 0, "tokens": [vocab.stoi["y"], EOS_ID],
           "log_likelihood": -1.5, "enc_rec": None, "dec_rec": -0.25}
    line = format_kbest(3, [row], vocab)[0]
    assert line.split("\t") == ["3", "0", "-1.500000", "-", "-0.250000", "y"]
