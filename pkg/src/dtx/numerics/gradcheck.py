"""Central-difference verification of reverse-mode gradients."""
import numpy as np

from .tensor import Tensor


def grad_check(f, params, eps=1e-5, max_coords=None, seed=0):
    """Max relative error between analytic and central-difference grads.

    f: callable taking no arguments and returning a scalar Tensor built
    from `params` (a Tensor or list of Tensors). Error per coordinate is
    |analytic - numeric| / max(1, |analytic|). With max_coords set, a
    deterministic random subset of coordinates is probed.
    """
    if isinstance(params, Tensor):
        params = [params]
    for p in params:
        p.zero_grad()
    out = f()
    if not np.all(np.isfinite(out.data)):
        raise FloatingPointError("objective is non-finite")
    out.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    coords = [(i, j) for i, p in enumerate(params) for j in range(p.data.size)]
    if max_coords is not None and len(coords) > max_coords:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[c] for c in pick]

    worst = 0.0
    for i, j in coords:
        flat = params[i].data.reshape(-1)
        old = flat[j]
        flat[j] = old + eps
        hi = float(f().data)
        flat[j] = old - eps
        lo = float(f().data)
        flat[j] = old
        numeric = (hi - lo) / (2.0 * eps)
        a = analytic[i].reshape(-1)[j]
        err = abs(a - numeric) / max(1.0, abs(a))
        if err > worst:
            worst = err
    return worst
