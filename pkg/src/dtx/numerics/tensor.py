"""Reverse-mode autodiff over NumPy arrays.

Only the operations the architecture needs are implemented. Every forward
op checks its output for NaN/Inf (a non-finite value is an error state,
not a number to propagate). Graphs are built per forward pass and
discarded after backward().
"""
import contextlib

import numpy as np


class NonFiniteError(FloatingPointError):
    """Raised when a forward op produces NaN or Inf."""


_GRAD_ENABLED = True
CHECK_FINITE = True


@contextlib.contextmanager
def no_grad():
    """Disable graph recording (inference / rollout speed)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def grad_enabled():
    return _GRAD_ENABLED


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents", "op")

    def __init__(self, data, requires_grad=False, _parents=(), op=""):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.asarray(data, dtype=np.float64)
        if CHECK_FINITE and not np.all(np.isfinite(self.data)):
            raise NonFiniteError(f"non-finite values in op '{op or 'leaf'}'")
        self.grad = None
        self.requires_grad = requires_grad and _GRAD_ENABLED
        self._backward = None
        self._parents = _parents if self.requires_grad else ()
        self.op = op

    # -- graph bookkeeping -------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def detach(self):
        return Tensor(self.data.copy())

    def item(self):
        return float(self.data)

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        topo, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            # free the closure so intermediate buffers can be collected
            node._backward = None
            node._parents = ()

    def zero_grad(self):
        self.grad = None

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _wrap(other)
        out = _node(self.data + other.data, (self, other), "add")
        if out.requires_grad:
            def back(g):
                if self.requires_grad:
                    self._accumulate(_unbroadcast(g, self.data.shape))
                if other.requires_grad:
                    other._accumulate(_unbroadcast(g, other.data.shape))
            out._backward = back
        return out

    __radd__ = __add__

    def __neg__(self):
        out = _node(-self.data, (self,), "neg")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(-g)
        return out

    def __sub__(self, other):
        return self + (-_wrap(other))

    def __rsub__(self, other):
        return _wrap(other) + (-self)

    def __mul__(self, other):
        other = _wrap(other)
        out = _node(self.data * other.data, (self, other), "mul")
        if out.requires_grad:
            a_data, b_data = self.data, other.data
            def back(g):
                if self.requires_grad:
                    self._accumulate(_unbroadcast(g * b_data, a_data.shape))
                if other.requires_grad:
                    other._accumulate(_unbroadcast(g * a_data, b_data.shape))
            out._backward = back
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _wrap(other)
        out = _node(self.data / other.data, (self, other), "div")
        if out.requires_grad:
            a_data, b_data = self.data, other.data
            def back(g):
                if self.requires_grad:
                    self._accumulate(_unbroadcast(g / b_data, a_data.shape))
                if other.requires_grad:
                    other._accumulate(
                        _unbroadcast(-g * a_data / (b_data * b_data), b_data.shape))
            out._backward = back
        return out

    def __rtruediv__(self, other):
        return _wrap(other) / self

    def __matmul__(self, other):
        other = _wrap(other)
        out = _node(np.matmul(self.data, other.data), (self, other), "matmul")
        if out.requires_grad:
            a_data, b_data = self.data, other.data
            def back(g):
                if self.requires_grad:
                    ga = np.matmul(g, np.swapaxes(b_data, -1, -2))
                    self._accumulate(_unbroadcast_matmul(ga, a_data.shape))
                if other.requires_grad:
                    gb = np.matmul(np.swapaxes(a_data, -1, -2), g)
                    other._accumulate(_unbroadcast_matmul(gb, b_data.shape))
            out._backward = back
        return out

    # -- shape ops ---------------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = _node(self.data.reshape(shape), (self,), "reshape")
        if out.requires_grad:
            orig = self.data.shape
            out._backward = lambda g: self._accumulate(g.reshape(orig))
        return out

    def transpose(self, axes):
        out = _node(np.transpose(self.data, axes), (self,), "transpose")
        if out.requires_grad:
            inv = np.argsort(axes)
            out._backward = lambda g: self._accumulate(np.transpose(g, inv))
        return out

    def __getitem__(self, idx):
        out = _node(self.data[idx], (self,), "slice")
        if out.requires_grad:
            shape = self.data.shape
            def back(g):
                full = np.zeros(shape)
                np.add.at(full, idx, g)
                self._accumulate(full)
            out._backward = back
        return out

    # -- reductions & elementwise ------------------------------------------

    def sum(self, axis=None, keepdims=False):
        out = _node(self.data.sum(axis=axis, keepdims=keepdims), (self,), "sum")
        if out.requires_grad:
            shape = self.data.shape
            def back(g):
                if axis is not None and not keepdims:
                    g = np.expand_dims(g, axis)
                self._accumulate(np.broadcast_to(g, shape).copy())
            out._backward = back
        return out

    def mean(self, axis=None, keepdims=False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) / float(count)

    def max(self, axis, keepdims=False):
        """Max along an axis; gradient routes to the (first) argmax."""
        idx = np.argmax(self.data, axis=axis)
        out = _node(self.data.max(axis=axis, keepdims=keepdims), (self,), "max")
        if out.requires_grad:
            shape = self.data.shape
            def back(g):
                if not keepdims:
                    g = np.expand_dims(g, axis)
                full = np.zeros(shape)
                sel = np.expand_dims(idx, axis)
                np.put_along_axis(full, sel, g, axis)
                self._accumulate(full)
            out._backward = back
        return out

    def exp(self):
        out = _node(np.exp(self.data), (self,), "exp")
        if out.requires_grad:
            e = out.data
            out._backward = lambda g: self._accumulate(g * e)
        return out

    def log(self):
        out = _node(np.log(self.data), (self,), "log")
        if out.requires_grad:
            d = self.data
            out._backward = lambda g: self._accumulate(g / d)
        return out

    def sqrt(self):
        out = _node(np.sqrt(self.data), (self,), "sqrt")
        if out.requires_grad:
            s = out.data
            out._backward = lambda g: self._accumulate(g / (2.0 * s))
        return out

    def tanh(self):
        out = _node(np.tanh(self.data), (self,), "tanh")
        if out.requires_grad:
            t = out.data
            out._backward = lambda g: self._accumulate(g * (1.0 - t * t))
        return out

    def relu(self):
        out = _node(np.maximum(self.data, 0.0), (self,), "relu")
        if out.requires_grad:
            m = self.data > 0.0
            out._backward = lambda g: self._accumulate(g * m)
        return out

    def abs(self):
        out = _node(np.abs(self.data), (self,), "abs")
        if out.requires_grad:
            s = np.sign(self.data)
            out._backward = lambda g: self._accumulate(g * s)
        return out

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self.op!r}, grad={self.requires_grad})"


def _wrap(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents, op):
    req = any(p.requires_grad for p in parents)
    return Tensor(data, requires_grad=req, _parents=parents, op=op)


def _unbroadcast(g, shape):
    """Reduce a broadcast gradient back to `shape`."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, extent in enumerate(shape):
        if extent == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _unbroadcast_matmul(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax in range(g.ndim - 2):
        if shape[ax] == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def concat(tensors, axis=0):
    tensors = [_wrap(t) for t in tensors]
    out = _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), "concat")
    if out.requires_grad:
        sizes = [t.data.shape[axis] for t in tensors]
        splits = np.cumsum(sizes)[:-1]
        def back(g):
            for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
                if t.requires_grad:
                    t._accumulate(piece)
        out._backward = back
    return out


def stack(tensors, axis=0):
    tensors = [_wrap(t) for t in tensors]
    out = _node(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), "stack")
    if out.requires_grad:
        def back(g):
            for i, t in enumerate(tensors):
                if t.requires_grad:
                    t._accumulate(np.take(g, i, axis=axis))
        out._backward = back
    return out
