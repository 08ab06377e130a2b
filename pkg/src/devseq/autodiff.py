"""Minimal reverse-mode automatic differentiation over float64 numpy arrays.

Graphs are built eagerly: every op returns a new :class:`Tensor` that
remembers its parents and a closure pushing its gradient back to them.
``backward(loss)`` walks the graph in reverse topological order. Leaf
tensors (parameters and inputs) *accumulate* gradients across calls;
intermediate gradients are recomputed from scratch each time.
"""

from __future__ import annotations

import enum
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Role",
    "Tensor",
    "parameter",
    "constant",
    "matmul",
    "add",
    "mul",
    "concat",
    "stack",
    "tanh",
    "sigmoid",
    "relu",
    "softmax",
    "log_softmax",
    "log_sum_exp",
    "max_over_time",
    "embedding_row_select",
    "windows",
    "dropout",
    "backward",
    "grad_check",
]


class Role(enum.Enum):
    PARAMETER = "parameter"
    INPUT = "input"
    INTERMEDIATE = "intermediate"


class Tensor:
    __slots__ = ("value", "grad", "role", "name", "op", "_parents", "_backward", "fresh")

    def __init__(self, value, role: Role = Role.INPUT, name: str | None = None):
        self.value = np.array(value, dtype=np.float64)
        self.role = role
        self.name = name
        self.op = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None
        self.grad = None if role is Role.INTERMEDIATE else np.zeros_like(self.value)
        self.fresh = False  # set when backward reached this leaf

    # -- bookkeeping -----------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def is_leaf(self) -> bool:
        return self.role is not Role.INTERMEDIATE

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)
        self.fresh = False

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    def __repr__(self) -> str:
        label = self.name or self.op or self.role.value
        return f"Tensor({label}, shape={self.shape})"

    # -- operator sugar --------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(_wrap(other)))

    def __rsub__(self, other):
        return add(_wrap(other), neg(self))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)

    def sum(self):
        return sum_all(self)

    def mean(self):
        return mean_all(self)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)


def parameter(value, name: str | None = None) -> Tensor:
    return Tensor(value, Role.PARAMETER, name)


def constant(value) -> Tensor:
    return Tensor(value, Role.INPUT)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else constant(x)


def _node(value: np.ndarray, parents: Sequence[Tensor], op: str, backward_fn) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.value = value
    out.role = Role.INTERMEDIATE
    out.name = None
    out.op = op
    out.grad = None
    out.fresh = False
    out._parents = tuple(parents)
    out._backward = backward_fn
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ValueError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


# -- elementwise ---------------------------------------------------------
def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _broadcast_shape("add", a, b)

    def back(g):
        a._accumulate(_unbroadcast(g, a.shape))
        b._accumulate(_unbroadcast(g, b.shape))

    return _node(a.value + b.value, (a, b), "add", back)


def neg(a: Tensor) -> Tensor:
    return _node(-a.value, (a,), "neg", lambda g: a._accumulate(-g))


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _broadcast_shape("mul", a, b)

    def back(g):
        a._accumulate(_unbroadcast(g * b.value, a.shape))
        b._accumulate(_unbroadcast(g * a.value, b.shape))

    return _node(a.value * b.value, (a, b), "mul", back)


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.value)
    return _node(y, (a,), "tanh", lambda g: a._accumulate(g * (1.0 - y * y)))


def sigmoid(a: Tensor) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * a.value))
    return _node(y, (a,), "sigmoid", lambda g: a._accumulate(g * y * (1.0 - y)))


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0
    return _node(a.value * mask, (a,), "relu", lambda g: a._accumulate(g * mask))


# -- reductions and normalisers -------------------------------------------
def sum_all(a: Tensor) -> Tensor:
    return _node(np.array(a.value.sum()), (a,), "sum", lambda g: a._accumulate(np.broadcast_to(g, a.shape)))


def mean_all(a: Tensor) -> Tensor:
    n = a.value.size

    def back(g):
        a._accumulate(np.broadcast_to(g / n, a.shape))

    return _node(np.array(a.value.mean()), (a,), "mean", back)


def log_sum_exp(a: Tensor, axis: int = -1, keepdims: bool = False) -> Tensor:
    """``log(sum(exp(a)))`` along ``axis``, shifted by the max so it never overflows."""
    m = a.value.max(axis=axis, keepdims=True)
    shifted = np.exp(a.value - m)
    total = shifted.sum(axis=axis, keepdims=True)
    out = np.log(total) + m
    weights = shifted / total

    def back(g):
        g = g if keepdims else np.expand_dims(g, axis)
        a._accumulate(g * weights)

    return _node(out if keepdims else np.squeeze(out, axis=axis), (a,), "log_sum_exp", back)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    e = np.exp(a.value - a.value.max(axis=axis, keepdims=True))
    y = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        a._accumulate(y * (g - (g * y).sum(axis=axis, keepdims=True)))

    return _node(y, (a,), "softmax", back)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    return add(a, neg(log_sum_exp(a, axis=axis, keepdims=True)))


def max_over_time(a: Tensor) -> Tensor:
    """Column-wise max over the first axis; the gradient goes to the first argmax."""
    if a.value.ndim != 2 or a.shape[0] == 0:
        raise ValueError(f"max_over_time: expected non-empty (time, features), got {a.shape}")
    idx = a.value.argmax(axis=0)
    cols = np.arange(a.shape[1])

    def back(g):
        full = np.zeros_like(a.value)
        full[idx, cols] = g
        a._accumulate(full)

    return _node(a.value[idx, cols], (a,), "max_over_time", back)


# -- shape ops -------------------------------------------------------------
def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.value.ndim not in (1, 2) or b.value.ndim not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise ValueError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def back(g):
        av, bv = a.value, b.value
        if av.ndim == 1 and bv.ndim == 1:
            a._accumulate(g * bv)
            b._accumulate(g * av)
        elif av.ndim == 1:
            a._accumulate(bv @ g)
            b._accumulate(np.outer(av, g))
        elif bv.ndim == 1:
            a._accumulate(np.outer(g, bv))
            b._accumulate(av.T @ g)
        else:
            a._accumulate(g @ bv.T)
            b._accumulate(av.T @ g)

    return _node(a.value @ b.value, (a, b), "matmul", back)


def getitem(a: Tensor, index) -> Tensor:
    def back(g):
        full = np.zeros_like(a.value)
        np.add.at(full, index, g)
        a._accumulate(full)

    return _node(np.array(a.value[index]), (a,), "getitem", back)


def reshape(a: Tensor, shape) -> Tensor:
    return _node(a.value.reshape(shape), (a,), "reshape", lambda g: a._accumulate(g.reshape(a.shape)))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    try:
        value = np.concatenate([t.value for t in tensors], axis=axis)
    except ValueError:
        shapes = ", ".join(str(t.shape) for t in tensors)
        raise ValueError(f"concat(axis={axis}): incompatible shapes {shapes}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def back(g):
        for t, piece in zip(tensors, np.split(g, bounds, axis=axis)):
            t._accumulate(piece)

    return _node(value, tensors, "concat", back)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ValueError(f"stack: shapes differ {sorted(shapes)}")

    def back(g):
        for t, piece in zip(tensors, np.moveaxis(g, axis, 0)):
            t._accumulate(piece)

    return _node(np.stack([t.value for t in tensors], axis=axis), tensors, "stack", back)


def embedding_row_select(table: Tensor, ids: Sequence[int] | np.ndarray) -> Tensor:
    ids = np.asarray(ids, dtype=np.intp)
    if table.value.ndim != 2:
        raise ValueError(f"embedding_row_select: table must be 2-D, got {table.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise IndexError(f"embedding_row_select: id out of range for table {table.shape}")

    def back(g):
        full = np.zeros_like(table.value)
        np.add.at(full, ids, g)
        table._accumulate(full)

    return _node(table.value[ids], (table,), "embedding_row_select", back)


def windows(a: Tensor, width: int) -> Tensor:
    """Sliding windows over rows: (L, d) -> (L - width + 1, width * d).

    Row ``t`` of the result is rows ``t .. t+width-1`` of ``a`` flattened,
    so a 1-D convolution becomes one matmul.
    """
    if a.value.ndim != 2 or a.shape[0] < width or width < 1:
        raise ValueError(f"windows: cannot take width {width} windows of shape {a.shape}")
    n = a.shape[0] - width + 1
    d = a.shape[1]
    rows = np.arange(n)[:, None] + np.arange(width)[None, :]
    value = a.value[rows].reshape(n, width * d)

    def back(g):
        full = np.zeros_like(a.value)
        np.add.at(full, rows, g.reshape(n, width, d))
        a._accumulate(full)

    return _node(value, (a,), "windows", back)


def dropout(x: Tensor, rate: float, train: bool, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout: survivors are scaled by ``1 / (1 - rate)``; eval is identity."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return _node(x.value * mask, (x,), "dropout", lambda g: x._accumulate(g * mask))


# -- driver ----------------------------------------------------------------
def _topological(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack_: list[tuple[Tensor, bool]] = [(root, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack_.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate ``grad`` of every tensor reachable from the scalar ``loss``."""
    if loss.value.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
    order = _topological(loss)
    for node in order:
        if not node.is_leaf:
            node.grad = np.zeros_like(node.value)
    loss._accumulate(np.ones_like(loss.value))
    for node in reversed(order):
        if node._backward is not None:
            node._backward(node.grad)
        elif node.is_leaf:
            node.fresh = True


def grad_check(
    f: Callable[[Tensor], Tensor] | Callable[[], Tensor],
    x: Tensor | Iterable[Tensor],
    eps: float = 1e-4,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Largest relative error between backward gradients and central differences.

    ``f`` is called as ``f(x)`` when ``x`` is a single tensor, else as
    ``f()`` with ``x`` the tensors to check. With ``max_coords`` only that
    many randomly chosen coordinates per tensor are perturbed.
    The error per coordinate is ``|a - n| / max(1e-8, |a| + |n|)``.
    """
    if isinstance(x, Tensor):
        tensors = [x]
        call = lambda: f(x)  # noqa: E731
    else:
        tensors = list(x)
        call = f
    for t in tensors:
        t.zero_grad()
    backward(call())
    analytic = [t.grad.copy() for t in tensors]
    rng = rng or np.random.default_rng(0)
    worst = 0.0
    for t, grad in zip(tensors, analytic):
        flat = t.value.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = np.sort(rng.choice(flat.size, max_coords, replace=False))
        for i in coords:
            orig = flat[i]
            flat[i] = orig + eps
            up = float(call().value)
            flat[i] = orig - eps
            down = float(call().value)
            flat[i] = orig
            num = (up - down) / (2 * eps)
            a = grad.reshape(-1)[i]
            err = abs(a - num) / max(1e-8, abs(a) + abs(num))
            worst = max(worst, err)
    for t in tensors:
        t.zero_grad()
    return worst
