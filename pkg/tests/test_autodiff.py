import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dprecon.autodiff import Graph, GraphError, NumericError, ShapeError, finite_diff_check

finite = st.floats(-30, 30, allow_nan=False, allow_infinity=False)


def test_softmax_of_equal_logits_is_uniform():
    g = Graph()
    out = g.softmax(g.constant([0.0, 0.0]))
    assert out.data.tolist() == [0.5, 0.5]


def test_matmul_identity():
    a = np.random.default_rng(0).normal(size=(3, 3))
    g = Graph()
    assert np.array_equal(g.matmul(g.constant(np.eye(3)), g.constant(a)).data, a)


def test_tanh_sigmoid_chain_matches_scalar_math():
    x = [[0.3, -1.2], [2.0, 0.05]]
    g = Graph()
    out = g.tanh(g.sigmoid(g.constant(x)))
    for i in range(2):
        for j in range(2):
            want = math.tanh(1.0 / (1.0 + math.exp(-x[i][j])))
            assert abs(out.data[i, j] - want) < 1e-12


def test_sum_gradient_is_ones():
    g = Graph()
    w = g.param("w", np.arange(6.0).reshape(2, 3))
    grads = g.backward(g.sum(w))
    assert np.array_equal(grads["w"], np.ones((2, 3)))


def test_half_squared_norm_gradient_is_w():
    w0 = np.array([[1.5, -2.0], [0.25, 3.0]])
    g = Graph()
    w = g.param("w", w0)
    loss = g.scale(g.sum(g.mul(w, w)), 0.5)
    assert np.allclose(g.backward(loss)["w"], w0, rtol=0, atol=1e-15)


def test_parameter_reuse_accumulates():
    g = Graph()
    w = g.param("w", [2.0])
    again = g.param("w", [99.0])
    assert again is w
    loss = g.sum(g.add(g.mul(w, w), g.scale(w, 3.0)))
    assert g.backward(loss)["w"].tolist() == [7.0]


def test_non_scalar_loss_rejected():
    g = Graph()
    w = g.param("w", np.ones(3))
    with pytest.raises(GraphError):
        g.backward(g.tanh(w))


def test_shape_error_names_node():
    g = Graph()
    a = g.constant(np.ones((2, 3)))
    g.tanh(a)
    with pytest.raises(ShapeError, match=r"matmul node #1"):
        g.matmul(a, g.constant(np.ones((2, 3))))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nan_detected_with_node_identity():
    g = Graph()
    a = g.constant([np.inf])
    with pytest.raises(NumericError, match="sub node #0"):
        g.sub(a, a)


def test_unused_leaf_gets_zero_gradient():
    g = Graph()
    w = g.param("w", [1.0, 2.0])
    g.param("unused", [3.0])
    grads = g.backward(g.sum(w))
    assert grads["unused"].tolist() == [0.0]


def test_forward_eval_replays_with_new_inputs():
    g = Graph()
    w = g.param("w", [1.0, 2.0])
    loss = g.sum(g.tanh(w))
    new = np.array([0.5, -0.5])
    out = g.forward_eval({"w": new}, loss)
    assert out.data == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ShapeError):
        g.forward_eval({"w": np.zeros(3)})
    with pytest.raises(GraphError):
        g.forward_eval({"nope": np.zeros(2)})


def test_forward_eval_is_bit_deterministic():
    rng = np.random.default_rng(3)
    g = Graph()
    w = g.param("w", rng.normal(size=(4, 4)))
    x = g.constant(rng.normal(size=(2, 4)))
    loss = g.sum(g.softmax(g.matmul(x, w)))
    first = g.forward_eval({"w": w.data.copy()}, loss).data.copy()
    assert np.array_equal(first, g.forward_eval({"w": w.data.copy()}, loss).data)


def test_finite_diff_quadratic_is_tight():
    g = Graph()
    w = g.param("w", np.array([0.3, -1.7, 2.2]))
    loss = g.sum(g.mul(w, w))
    assert finite_diff_check(g, loss, epsilon=1e-5) < 1e-7


def test_finite_diff_without_parameters_is_zero():
    g = Graph()
    loss = g.sum(g.tanh(g.constant([1.0, 2.0])))
    assert finite_diff_check(g, loss) == 0.0


def test_finite_diff_rejects_bad_epsilon():
    g = Graph()
    loss = g.sum(g.param("w", [1.0]))
    with pytest.raises(ValueError):
        finite_diff_check(g, loss, epsilon=0.0)


def _primitive_losses(rng):
    """One small scalar loss per primitive, each with a random projection."""
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(3, 4))
    m = rng.normal(size=(4, 2))
    ids = np.array([[0, 2], [1, 1]])
    cases = {
        "add": lambda g, A, B: g.add(A, B),
        "sub": lambda g, A, B: g.sub(A, B),
        "mul": lambda g, A, B: g.mul(A, B),
        "scale": lambda g, A, B: g.scale(A, -1.7),
        "matmul": lambda g, A, B: g.matmul(A, g.param("m", m)),
        "matmul3d": lambda g, A, B: g.matmul(g.reshape(A, (3, 1, 4)), g.param("m", m)),
        "tanh": lambda g, A, B: g.tanh(A),
        "sigmoid": lambda g, A, B: g.sigmoid(A),
        "softmax": lambda g, A, B: g.softmax(A),
        "softmax_mask": lambda g, A, B: g.softmax(A, np.array([[1, 1, 0, 1]] * 3, bool)),
        "cross_entropy": lambda g, A, B: g.cross_entropy(A, np.array([0, 3, 1])),
        "concat": lambda g, A, B: g.concat([A, B], axis=0),
        "stack": lambda g, A, B: g.stack([A, B], axis=1),
        "getitem": lambda g, A, B: g.getitem(A, (slice(None), slice(1, 3))),
        "embedding": lambda g, A, B: g.embedding(A, ids),
        "sum_axis": lambda g, A, B: g.sum(A, axis=0),
        "where": lambda g, A, B: g.where(np.array([[True, False, True, False]] * 3), A, B),
        "broadcast_add": lambda g, A, B: g.add(A, g.param("bias", rng.normal(size=4))),
    }
    return a, b, cases


@pytest.mark.parametrize("name", list(_primitive_losses(np.random.default_rng(0))[2]))
def test_every_primitive_passes_finite_differences(name):
    rng = np.random.default_rng(1)
    a, b, cases = _primitive_losses(rng)
    g = Graph()
    A, B = g.param("a", a), g.param("b", b)
    out = cases[name](g, A, B)
    proj = g.constant(rng.normal(size=out.shape))
    loss = g.sum(g.mul(out, proj))
    assert finite_diff_check(g, loss, epsilon=1e-4) < 1e-4


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 6)), elements=finite))
def test_softmax_rows_are_distributions(x):
    p = Graph(record=False).softmax(x).data
    assert (p >= 0).all()
    assert np.allclose(p.sum(axis=-1), 1.0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(2, 6)), elements=finite), st.data())
def test_cross_entropy_equals_negative_log_softmax(x, data):
    targets = np.array([data.draw(st.integers(0, x.shape[1] - 1)) for _ in range(x.shape[0])])
    g = Graph(record=False)
    ce = g.cross_entropy(x, targets).data
    p = g.softmax(x).data
    ref = -np.log(p[np.arange(len(targets)), targets])
    assert np.allclose(ce, ref, rtol=1e-9, atol=1e-9)
    assert (ce >= 0).all()
