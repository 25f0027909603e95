"""Reverse-mode automatic differentiation on dense float64 arrays.

A :class:`Tape` records one computation graph: every operation appends a
:class:`Node` whose parents already live on the tape, so node ids are a
topological order by construction and the backward sweep is a single
reversed pass. Values are always 2-D row-major float64 arrays; scalars are
(1, 1). Broadcasting is deliberately restricted to the one case the models
need, adding a (1, d) bias row to an (n, d) matrix.

Custom operations can be grafted on with :meth:`Tape.emit`, which is how
the loss layer defines its conditioning feature map.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .errors import ContractError, DimensionError, NumericDomainError

PROB_EPS = 1e-7  # clamp floor used before taking logs of probabilities


def as_value(x) -> np.ndarray:
    """Coerce input to a finite 2-D float64 array (1-D becomes a row)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise DimensionError(f"expected at most 2 dimensions, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericDomainError("non-finite entries are not allowed on the tape")
    return np.ascontiguousarray(arr)


class Node:
    """One tape entry: a value, its gradient buffer and its provenance."""

    __slots__ = ("tape", "id", "value", "grad", "op", "parents", "_backward")

    def __init__(self, tape, nid, value, op, parents, backward):
        self.tape = tape
        self.id = nid
        self.value = value
        self.grad = np.zeros_like(value)
        self.op = op
        self.parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Node(id={self.id}, op={self.op!r}, shape={self.value.shape})"

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)


class Tape:
    """Append-only record of nodes; parents always precede children."""

    def __init__(self):
        self.nodes: list[Node] = []

    def leaf(self, value) -> Node:
        return self.emit(as_value(value), "leaf", (), None)

    def emit(self, value, op, parents, backward) -> Node:
        """Append a node. ``backward(out_grad)`` must accumulate into parents."""
        for p in parents:
            if p.tape is not self:
                raise ContractError("cannot mix nodes from different tapes")
        node = Node(self, len(self.nodes), value, op, tuple(p.id for p in parents), backward)
        self.nodes.append(node)
        return node


def backward(tape: Tape, loss: Node, on_visit=None):
    """Reverse sweep seeding d(loss)/d(loss) = 1.

    Gradients accumulate additively across fan-out. ``on_visit`` is an
    optional hook called with each node id as its backward rule fires,
    used by tests to assert the topological-order property.
    """
    if loss.tape is not tape:
        raise ContractError("loss node does not belong to this tape")
    if loss.value.shape != (1, 1):
        raise ContractError(f"loss must be scalar (1, 1), got {loss.value.shape}")
    loss.grad[0, 0] = 1.0
    for node in reversed(tape.nodes):
        if node._backward is not None:
            if on_visit is not None:
                on_visit(node.id)
            node._backward(node.grad)


# ---------------------------------------------------------------------------
# primitive operations
# ---------------------------------------------------------------------------


def matmul(a: Node, b: Node) -> Node:
    if a.value.shape[1] != b.value.shape[0]:
        raise DimensionError(
            f"matmul inner dimensions disagree: {a.value.shape} x {b.value.shape}"
        )
    out = a.value @ b.value

    def bwd(g):
        a.grad += g @ b.value.T
        b.grad += a.value.T @ g

    return a.tape.emit(out, "matmul", (a, b), bwd)


def add(a: Node, b: Node) -> Node:
    """Elementwise sum; also accepts a (1, d) bias row for b."""
    if a.value.shape == b.value.shape:

        def bwd(g):
            a.grad += g
            b.grad += g

    elif b.value.shape == (1, a.value.shape[1]):

        def bwd(g):
            a.grad += g
            b.grad += g.sum(axis=0, keepdims=True)

    else:
        raise DimensionError(f"cannot add shapes {a.value.shape} and {b.value.shape}")
    return a.tape.emit(a.value + b.value, "add", (a, b), bwd)


def mul(a: Node, b: Node) -> Node:
    if a.value.shape != b.value.shape:
        raise DimensionError(f"cannot multiply shapes {a.value.shape} and {b.value.shape}")

    def bwd(g):
        a.grad += g * b.value
        b.grad += g * a.value

    return a.tape.emit(a.value * b.value, "mul", (a, b), bwd)


def neg(a: Node) -> Node:
    def bwd(g):
        a.grad -= g

    return a.tape.emit(-a.value, "neg", (a,), bwd)


def sub(a: Node, b: Node) -> Node:
    return add(a, neg(b))


def scale(a: Node, c: float) -> Node:
    c = float(c)

    def bwd(g):
        a.grad += c * g

    return a.tape.emit(c * a.value, "scale", (a,), bwd)


def shift(a: Node, c: float) -> Node:
    """Add a python constant elementwise (used for 1 - x)."""
    c = float(c)

    def bwd(g):
        a.grad += g

    return a.tape.emit(a.value + c, "shift", (a,), bwd)


def log(a: Node) -> Node:
    if np.any(a.value <= 0.0):
        raise NumericDomainError("log requires strictly positive input")
    out = np.log(a.value)

    def bwd(g):
        a.grad += g / a.value

    return a.tape.emit(out, "log", (a,), bwd)


def exp(a: Node) -> Node:
    out = np.exp(a.value)
    if not np.all(np.isfinite(out)):
        raise NumericDomainError("exp overflowed to non-finite values")

    def bwd(g):
        a.grad += g * out

    return a.tape.emit(out, "exp", (a,), bwd)


def relu(a: Node) -> Node:
    out = backend.relu(a.value)

    def bwd(g):
        a.grad += backend.relu_backward(g, a.value)

    return a.tape.emit(out, "relu", (a,), bwd)


def sigmoid(a: Node) -> Node:
    out = backend.sigmoid(a.value)

    def bwd(g):
        a.grad += backend.sigmoid_backward(g, out)

    return a.tape.emit(out, "sigmoid", (a,), bwd)


def clip(a: Node, lo: float, hi: float) -> Node:
    out = backend.clip(a.value, lo, hi)

    def bwd(g):
        a.grad += backend.clip_backward(g, a.value, lo, hi)

    return a.tape.emit(out, "clip", (a,), bwd)


def softmax_rows(a: Node) -> Node:
    out = backend.softmax_rows(a.value)

    def bwd(g):
        a.grad += backend.softmax_rows_backward(g, out)

    return a.tape.emit(out, "softmax_rows", (a,), bwd)


def gradient_reversal(a: Node, strength: float = 1.0) -> Node:
    """Identity forward; backward multiplies the incoming gradient by -strength."""
    strength = float(strength)
    if strength < 0.0:
        raise ContractError(f"reversal strength must be >= 0, got {strength}")

    def bwd(g):
        a.grad -= strength * g

    return a.tape.emit(a.value, "gradient_reversal", (a,), bwd)


def sum_all(a: Node) -> Node:
    out = np.array([[a.value.sum()]])

    def bwd(g):
        a.grad += g[0, 0]

    return a.tape.emit(out, "sum_all", (a,), bwd)


def mean_all(a: Node) -> Node:
    n = a.value.size
    out = np.array([[a.value.sum() / n]])

    def bwd(g):
        a.grad += g[0, 0] / n

    return a.tape.emit(out, "mean_all", (a,), bwd)


def sum_rows(a: Node) -> Node:
    """Row sums as an (n, 1) column."""
    out = a.value.sum(axis=1, keepdims=True)

    def bwd(g):
        a.grad += g  # broadcasts the (n, 1) column over columns

    return a.tape.emit(out, "sum_rows", (a,), bwd)
