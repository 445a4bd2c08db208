"""Neural building blocks on the autodiff tensor: MLPs, softmax,
layer-norm variants, and multi-head attention."""
import numpy as np

from .tensor import Tensor, concat

LN_EPS = 1e-5

_ACTIVATIONS = {
    "relu": lambda x: x.relu(),
    "tanh": lambda x: x.tanh(),
    "identity": lambda x: x,
}


def xavier_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class MlpParams:
    """Per-layer weights/biases plus an activation identifier.

    Adjacent layer dims must chain; the activation is applied between
    layers (never after the last one).
    """

    def __init__(self, weights, biases, activation="relu"):
        if len(weights) != len(biases):
            raise ValueError("weights/biases length mismatch")
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        for a, b in zip(weights[:-1], weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise ValueError("layer dimensions do not chain")
        for w, b in zip(weights, biases):
            if w.shape[1] != b.shape[0]:
                raise ValueError("bias dimension mismatch")
        self.weights = weights
        self.biases = biases
        self.activation = activation

    @classmethod
    def create(cls, rng, dims, activation="relu", requires_grad=True):
        ws, bs = [], []
        for fi, fo in zip(dims[:-1], dims[1:]):
            ws.append(Tensor(xavier_uniform(rng, fi, fo), requires_grad=requires_grad))
            bs.append(Tensor(np.zeros(fo), requires_grad=requires_grad))
        return cls(ws, bs, activation)

    @property
    def in_dim(self):
        return self.weights[0].shape[0]

    @property
    def out_dim(self):
        return self.weights[-1].shape[1]

    def parameters(self):
        return list(self.weights) + list(self.biases)


def mlp_forward(x, params):
    """Apply an MLP; x has the feature dim last."""
    if x.shape[-1] != params.in_dim:
        raise ValueError(f"input dim {x.shape[-1]} != mlp in_dim {params.in_dim}")
    act = _ACTIVATIONS[params.activation]
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i != last:
            h = act(h)
    return h


def softmax(x, axis=-1):
    if x.shape[axis] == 0:
        raise ValueError("softmax over an empty axis")
    shift = Tensor(np.max(x.data, axis=axis, keepdims=True))  # constant shift
    e = (x - shift).exp()
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(x, axis=-1):
    shift = Tensor(np.max(x.data, axis=axis, keepdims=True))
    z = x - shift
    return z - z.exp().sum(axis=axis, keepdims=True).log()


def layer_norm(x, gamma, beta, eps=LN_EPS):
    """Pre-affine normalization over the last axis, then gamma/beta."""
    if x.shape[-1] != gamma.shape[-1] or x.shape[-1] != beta.shape[-1]:
        raise ValueError("gamma/beta length must match the last axis")
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    norm = centered / (var + eps).sqrt()
    return norm * gamma + beta


def ada_layer_norm(x, condition, params):
    """Layer norm whose gamma/beta are predicted from a condition vector.

    The MLP must emit 2 * feature_dim values, split as gamma ‖ beta.
    """
    d = x.shape[-1]
    if params.out_dim != 2 * d:
        raise ValueError("condition MLP must emit 2 x feature dim")
    gb = mlp_forward(condition, params)
    gamma = gb[..., :d]
    beta = gb[..., d:]
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    norm = centered / (var + LN_EPS).sqrt()
    return norm * gamma + beta


class AttnParams:
    """Q/K/V/output projections for one attention call."""

    def __init__(self, wq, bq, wk, bk, wv, bv, wo, bo):
        self.wq, self.bq = wq, bq
        self.wk, self.bk = wk, bk
        self.wv, self.bv = wv, bv
        self.wo, self.bo = wo, bo

    @classmethod
    def create(cls, rng, dim, requires_grad=True):
        def w():
            return Tensor(xavier_uniform(rng, dim, dim), requires_grad=requires_grad)

        def b():
            return Tensor(np.zeros(dim), requires_grad=requires_grad)

        return cls(w(), b(), w(), b(), w(), b(), w(), b())

    def parameters(self):
        return [self.wq, self.bq, self.wk, self.bk, self.wv, self.bv, self.wo, self.bo]


def mha(q, k, v, heads, params, mask=None):
    """Scaled dot-product multi-head attention.

    q: (n_q, D); k, v: (n_k, D) with equal key counts. mask, if given, is
    an additive (n_q, n_k) array applied to the attention logits.
    """
    d = q.shape[-1]
    if d % heads != 0:
        raise ValueError("model dim must be divisible by head count")
    if k.shape[0] != v.shape[0]:
        raise ValueError("key/value counts differ")
    if k.shape[-1] != d or v.shape[-1] != d:
        raise ValueError("q/k/v model dims differ")
    dh = d // heads
    nq, nk = q.shape[0], k.shape[0]

    qh = (q @ params.wq + params.bq).reshape(nq, heads, dh).transpose((1, 0, 2))
    kh = (k @ params.wk + params.bk).reshape(nk, heads, dh).transpose((1, 0, 2))
    vh = (v @ params.wv + params.bv).reshape(nk, heads, dh).transpose((1, 0, 2))

    scores = (qh @ kh.transpose((0, 2, 1))) * (1.0 / np.sqrt(dh))
    if mask is not None:
        scores = scores + Tensor(np.asarray(mask, dtype=np.float64))
    attn = softmax(scores, axis=-1)
    out = (attn @ vh).transpose((1, 0, 2)).reshape(nq, d)
    return out @ params.wo + params.bo


def dropout(x, rate, rng):
    """Inverted dropout; identity at rate 0."""
    if rate <= 0.0:
        return x
    keep = 1.0 - rate
    mask = (rng.random(x.shape) < keep).astype(np.float64) / keep
    return x * Tensor(mask)
