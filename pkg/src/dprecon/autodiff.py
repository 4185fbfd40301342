"""Tape-based reverse-mode differentiation over dense float64 arrays.

A :class:`Graph` records every primitive applied while a model is being
evaluated.  Values are computed eagerly, so ordinary Python control flow
(sequence lengths, beam bookkeeping) can drive graph construction.  The
recorded tape can be replayed with new leaf values (:meth:`Graph.forward_eval`),
which is what the finite-difference checker relies on.

Only the primitives needed by GRU / attention / softmax networks are provided.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "Graph",
    "GraphError",
    "ShapeError",
    "NumericError",
    "finite_diff_check",
]

DTYPE = np.float64


class GraphError(ValueError):
    pass


class ShapeError(GraphError):
    pass


class NumericError(FloatingPointError):
    pass


class Tensor:
    """A node of the computation graph.

    Leaves are created with :meth:`Graph.param` / :meth:`Graph.constant`;
    every other tensor is the output of exactly one primitive.
    """

    __slots__ = ("data", "requires_grad", "grad", "name", "op", "parents", "attrs", "index")

    def __init__(self, data, requires_grad=False, name=None, op=None, parents=(), attrs=None):
        self.data = data
        self.requires_grad = requires_grad
        self.grad = None
        self.name = name
        self.op = op
        self.parents = parents
        self.attrs = attrs
        self.index = -1

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        label = self.name or self.op or "leaf"
        return f"Tensor({label}, shape={self.data.shape})"


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# primitives: forward(*arrays, **attrs) -> array
#             backward(gout, out, *arrays, **attrs) -> tuple of grads (or None)
# ---------------------------------------------------------------------------


def _add_f(a, b):
    return a + b


def _add_b(g, out, a, b):
    return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)


def _sub_f(a, b):
    return a - b


def _sub_b(g, out, a, b):
    return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)


def _mul_f(a, b):
    return a * b


def _mul_b(g, out, a, b):
    return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)


def _scale_f(a, factor):
    return a * factor


def _scale_b(g, out, a, factor):
    return (g * factor,)


def _matmul_f(a, b):
    return np.matmul(a, b)


def _matmul_b(g, out, a, b):
    if b.ndim == 2:
        ga = g @ b.T
        if a.ndim == 2:
            gb = a.T @ g
        else:
            k = a.shape[-1]
            gb = a.reshape(-1, k).T @ g.reshape(-1, g.shape[-1])
        return ga, gb
    ga = np.matmul(g, np.swapaxes(b, -1, -2))
    gb = np.matmul(np.swapaxes(a, -1, -2), g)
    return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)


def _tanh_f(a):
    return np.tanh(a)


def _tanh_b(g, out, a):
    return (g * (1.0 - out * out),)


def _sigmoid_f(a):
    # split by sign so exp never overflows
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


def _sigmoid_b(g, out, a):
    return (g * out * (1.0 - out),)


def _softmax_f(a, mask=None):
    if mask is not None:
        a = np.where(mask, a, -np.inf)
    shifted = a - a.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _softmax_b(g, out, a, mask=None):
    gs = g * out
    return (gs - out * gs.sum(axis=-1, keepdims=True),)


def _xent_f(logits, targets):
    # fused log-softmax + negative log-likelihood, one value per row
    shifted = logits - logits.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1))
    picked = np.take_along_axis(shifted, targets[..., None], axis=-1)[..., 0]
    return lse - picked


def _xent_b(g, out, logits, targets):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    p = np.exp(shifted)
    p /= p.sum(axis=-1, keepdims=True)
    np.put_along_axis(p, targets[..., None], np.take_along_axis(p, targets[..., None], axis=-1) - 1.0, axis=-1)
    return (p * g[..., None],)


def _concat_f(*arrays, axis):
    return np.concatenate(arrays, axis=axis)


def _concat_b(g, out, *arrays, axis):
    bounds = np.cumsum([a.shape[axis] for a in arrays])[:-1]
    return tuple(np.split(g, bounds, axis=axis))


def _stack_f(*arrays, axis):
    return np.stack(arrays, axis=axis)


def _stack_b(g, out, *arrays, axis):
    return tuple(np.take(g, i, axis=axis) for i in range(len(arrays)))


def _getitem_f(a, key):
    return a[key]


def _getitem_b(g, out, a, key):
    full = np.zeros_like(a)
    full[key] = g
    return (full,)


def _reshape_f(a, shape):
    return a.reshape(shape)


def _reshape_b(g, out, a, shape):
    return (g.reshape(a.shape),)


def _embed_f(table, ids):
    return table[ids]


def _embed_b(g, out, table, ids):
    full = np.zeros_like(table)
    np.add.at(full, ids.reshape(-1), g.reshape(-1, table.shape[1]))
    return (full,)


def _sum_f(a, axis=None):
    return np.sum(a, axis=axis)


def _sum_b(g, out, a, axis=None):
    if axis is None:
        return (np.broadcast_to(g, a.shape).copy(),)
    return (np.broadcast_to(np.expand_dims(g, axis), a.shape).copy(),)


def _where_f(a, b, cond):
    return np.where(cond, a, b)


def _where_b(g, out, a, b, cond):
    return _unbroadcast(np.where(cond, g, 0.0), a.shape), _unbroadcast(np.where(cond, 0.0, g), b.shape)


_PRIMITIVES = {
    "add": (_add_f, _add_b),
    "sub": (_sub_f, _sub_b),
    "mul": (_mul_f, _mul_b),
    "scale": (_scale_f, _scale_b),
    "matmul": (_matmul_f, _matmul_b),
    "tanh": (_tanh_f, _tanh_b),
    "sigmoid": (_sigmoid_f, _sigmoid_b),
    "softmax": (_softmax_f, _softmax_b),
    "cross_entropy": (_xent_f, _xent_b),
    "concat": (_concat_f, _concat_b),
    "stack": (_stack_f, _stack_b),
    "getitem": (_getitem_f, _getitem_b),
    "reshape": (_reshape_f, _reshape_b),
    "embedding": (_embed_f, _embed_b),
    "sum": (_sum_f, _sum_b),
    "where": (_where_f, _where_b),
}

# arguments that are integer/boolean data, never differentiated
_INDEX_ARGS = {"cross_entropy": (1,), "embedding": (1,)}


class Graph:
    """Records primitives in construction order for a single backward pass.

    Parameters
    ----------
    record : bool
        When False nothing is kept on the tape; use for inference.
    check_nan : bool
        Raise :class:`NumericError` naming the offending node as soon as a
        primitive produces NaN.
    """

    def __init__(self, record=True, check_nan=True):
        self.record = record
        self.check_nan = check_nan
        self.nodes = []
        self.leaves = {}

    # -- leaves -----------------------------------------------------------
    def param(self, name, value, requires_grad=True):
        """Return the leaf bound to ``name``, creating it on first use.

        A parameter used many times maps to one leaf, so its gradient is the
        sum over all uses.
        """
        leaf = self.leaves.get(name)
        if leaf is None:
            leaf = Tensor(np.asarray(value, dtype=DTYPE), requires_grad and self.record, name=name)
            self.leaves[name] = leaf
        return leaf

    def constant(self, value, name=None):
        t = Tensor(np.asarray(value, dtype=DTYPE), False, name=name)
        if name is not None:
            self.leaves[name] = t
        return t

    def _as_tensor(self, x):
        return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=DTYPE))

    # -- node creation ----------------------------------------------------
    def _apply(self, op, args, **attrs):
        fwd = _PRIMITIVES[op][0]
        arrays = [a.data if isinstance(a, Tensor) else a for a in args]
        try:
            out = fwd(*arrays, **attrs)
        except ValueError as exc:
            shapes = [getattr(a, "shape", None) for a in arrays]
            raise ShapeError(f"{op} node #{len(self.nodes)}: incompatible shapes {shapes}: {exc}") from None
        if self.check_nan and np.isnan(out).any():
            raise NumericError(f"NaN produced by {op} node #{len(self.nodes)}")
        if not self.record:
            return Tensor(out)
        index_args = _INDEX_ARGS.get(op, ())
        parents = tuple(a if isinstance(a, Tensor) or i in index_args else Tensor(np.asarray(a))
                        for i, a in enumerate(args))
        needs = any(p.requires_grad for p in parents if isinstance(p, Tensor))
        node = Tensor(out, needs, op=op, parents=parents, attrs=attrs)
        node.index = len(self.nodes)
        self.nodes.append(node)
        return node

    def add(self, a, b):
        return self._apply("add", (a, b))

    def sub(self, a, b):
        return self._apply("sub", (a, b))

    def mul(self, a, b):
        return self._apply("mul", (a, b))

    def scale(self, a, factor):
        return self._apply("scale", (a,), factor=float(factor))

    def matmul(self, a, b):
        return self._apply("matmul", (a, b))

    def tanh(self, a):
        return self._apply("tanh", (a,))

    def sigmoid(self, a):
        return self._apply("sigmoid", (a,))

    def softmax(self, a, mask=None):
        """Softmax over the last axis; positions where ``mask`` is False get 0."""
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
        return self._apply("softmax", (a,), mask=mask)

    def cross_entropy(self, logits, targets):
        """Per-row ``-log softmax(logits)[target]``; targets are integer ids."""
        targets = np.asarray(targets, dtype=np.int64)
        if np.any(targets < 0) or np.any(targets >= logits.shape[-1]):
            raise ShapeError(f"cross_entropy node #{len(self.nodes)}: target id out of range")
        return self._apply("cross_entropy", (logits, targets))

    def concat(self, tensors, axis=-1):
        return self._apply("concat", tuple(tensors), axis=axis)

    def stack(self, tensors, axis=0):
        return self._apply("stack", tuple(tensors), axis=axis)

    def getitem(self, a, key):
        return self._apply("getitem", (a,), key=key)

    def reshape(self, a, shape):
        return self._apply("reshape", (a,), shape=tuple(shape))

    def embedding(self, table, ids):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
            raise ShapeError(f"embedding node #{len(self.nodes)}: id out of range for table of {table.shape[0]} rows")
        return self._apply("embedding", (table, ids))

    def sum(self, a, axis=None):
        return self._apply("sum", (a,), axis=axis)

    def where(self, cond, a, b):
        """Select ``a`` where ``cond`` holds, else ``b`` (``cond`` is constant)."""
        return self._apply("where", (a, b), cond=np.asarray(cond, dtype=bool))

    # -- evaluation -------------------------------------------------------
    def backward(self, loss):
        """Accumulate gradients of scalar ``loss`` into every leaf.

        Returns a dict ``name -> gradient`` for named leaves that require
        gradients.  Leaves untouched by the loss get zero gradients.
        """
        if not self.record:
            raise GraphError("graph was built with record=False")
        if loss.data.size != 1:
            raise GraphError(f"loss must be scalar, got shape {loss.data.shape}")
        for node in self.nodes:
            node.grad = None
        for leaf in self.leaves.values():
            leaf.grad = None
        loss.grad = np.ones_like(loss.data)
        stop = loss.index if loss.index >= 0 else -1
        for node in reversed(self.nodes[: stop + 1]):
            if node.grad is None or not node.requires_grad:
                continue
            bwd = _PRIMITIVES[node.op][1]
            arrays = [p.data if isinstance(p, Tensor) else p for p in node.parents]
            grads = bwd(node.grad, node.data, *arrays, **node.attrs)
            for parent, pg in zip(node.parents, grads):
                if pg is None or not isinstance(parent, Tensor) or not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = pg
                else:
                    parent.grad = parent.grad + pg
        return {
            name: (leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data))
            for name, leaf in self.leaves.items()
            if leaf.requires_grad
        }

    def forward_eval(self, inputs=None, output=None):
        """Replay the tape with leaves rebound from ``inputs`` (name -> array).

        The replay follows the recorded structure, so it is only meaningful
        for inputs of the shapes the graph was built with.  Returns ``output``
        (default: the last node).
        """
        for name, value in (inputs or {}).items():
            leaf = self.leaves.get(name)
            if leaf is None:
                raise GraphError(f"no leaf named {name!r}")
            value = np.asarray(value, dtype=DTYPE)
            if value.shape != leaf.data.shape:
                raise ShapeError(f"leaf {name!r}: expected shape {leaf.data.shape}, got {value.shape}")
            leaf.data = value
        stop = output.index if output is not None else len(self.nodes) - 1
        for node in self.nodes[: stop + 1]:
            fwd = _PRIMITIVES[node.op][0]
            arrays = [p.data if isinstance(p, Tensor) else p for p in node.parents]
            node.data = fwd(*arrays, **node.attrs)
            if self.check_nan and np.isnan(node.data).any():
                raise NumericError(f"NaN produced by {node.op} node #{node.index}")
        return output if output is not None else (self.nodes[-1] if self.nodes else None)


def _downstream(graph, leaf):
    """Indices of nodes that (transitively) depend on ``leaf``, in tape order."""
    hit = {id(leaf)}
    out = []
    for node in graph.nodes:
        if any(id(p) in hit for p in node.parents):
            hit.add(id(node))
            out.append(node)
    return out


def _replay(nodes):
    for node in nodes:
        fwd = _PRIMITIVES[node.op][0]
        node.data = fwd(*[p.data if isinstance(p, Tensor) else p for p in node.parents], **node.attrs)


def finite_diff_check(graph, loss, params=None, epsilon=1e-4):
    """Compare analytic gradients of ``loss`` with central differences.

    ``params`` lists the leaf names to check (default: every leaf that
    requires a gradient).  Returns the maximum over all checked entries of
    ``|analytic - numeric| / (|analytic| + |numeric| + 1e-12)``.

    Each perturbation only replays the nodes downstream of the perturbed
    leaf; everything else keeps its recorded value.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    analytic = graph.backward(loss)
    names = list(analytic) if params is None else list(params)
    worst = 0.0
    for name in names:
        leaf = graph.leaves[name]
        affected = [n for n in _downstream(graph, leaf) if n.index <= loss.index]
        if not affected or affected[-1] is not loss:
            # loss does not depend on this leaf; both gradients are exactly zero
            continue
        flat = leaf.data.reshape(-1)
        grad = analytic[name].reshape(-1)
        for k in range(flat.size):
            saved = flat[k]
            flat[k] = saved + epsilon
            _replay(affected)
            up = float(loss.data)
            flat[k] = saved - epsilon
            _replay(affected)
            down = float(loss.data)
            flat[k] = saved
            numeric = (up - down) / (2.0 * epsilon)
            err = abs(grad[k] - numeric) / (abs(grad[k]) + abs(numeric) + 1e-12)
            worst = max(worst, err)
        _replay(affected)
    return worst
