"""The three attentions and their composition into the stacked body.

Block order is SCA -> TCA -> TSA -> FFN, each applied as
x + op(prenorm(x)). Sensor tokens and temporal queues are shared,
read-only inputs across all blocks.
"""
from dataclasses import dataclass, replace

import numpy as np

from .heads import aggregate_map
from .numerics import (AttnParams, MlpParams, Tensor, concat, dropout,
                       layer_norm, mha, mlp_forward, xavier_uniform)


@dataclass
class LayerNormParams:
    gamma: Tensor
    beta: Tensor

    @classmethod
    def create(cls, dim, requires_grad=True):
        return cls(Tensor(np.ones(dim), requires_grad=requires_grad),
                   Tensor(np.zeros(dim), requires_grad=requires_grad))

    def parameters(self):
        return [self.gamma, self.beta]


@dataclass
class BlockParams:
    ln_sca: LayerNormParams
    ln_tca: LayerNormParams
    ln_tsa: LayerNormParams
    ln_ffn: LayerNormParams
    sca: AttnParams
    tca: AttnParams
    tsa: AttnParams
    ffn: MlpParams

    @classmethod
    def create(cls, rng, dim, ffn_mult=4):
        return cls(
            ln_sca=LayerNormParams.create(dim),
            ln_tca=LayerNormParams.create(dim),
            ln_tsa=LayerNormParams.create(dim),
            ln_ffn=LayerNormParams.create(dim),
            sca=AttnParams.create(rng, dim),
            tca=AttnParams.create(rng, dim),
            tsa=AttnParams.create(rng, dim),
            ffn=MlpParams.create(rng, [dim, ffn_mult * dim, dim]),
        )

    def parameters(self):
        out = []
        for ln in (self.ln_sca, self.ln_tca, self.ln_tsa, self.ln_ffn):
            out.extend(ln.parameters())
        for att in (self.sca, self.tca, self.tsa):
            out.extend(att.parameters())
        out.extend(self.ffn.parameters())
        return out


def _prenorm(x, ln):
    return layer_norm(x, ln.gamma, ln.beta)


def sensor_cross_attention(tq, sensor, bp, heads):
    """All task queries jointly attend to the raw sensor tokens (map
    queries participate at point level)."""
    if sensor.count == 0:
        raise ValueError("empty sensor token set")
    n_a = tq.agent_h.shape[0]
    q = concat([
        _prenorm(tq.ego_h, bp.ln_sca) + tq.ego_pe,
        _prenorm(tq.agent_h, bp.ln_sca) + tq.agent_pe,
        _prenorm(tq.map_h, bp.ln_sca) + tq.map_pe,
    ], axis=0)
    k = sensor.flat_features() + sensor.flat_pe()
    v = sensor.flat_features()
    out = mha(q, k, v, heads, bp.sca)
    return replace(
        tq,
        ego_h=tq.ego_h + out[0:1],
        agent_h=tq.agent_h + out[1:1 + n_a],
        map_h=tq.map_h + out[1 + n_a:],
    )


def temporal_cross_attention(tq, kv, bp, heads):
    """Each family attends to its own history; empty history is an
    identity pass-through (residual only)."""
    updates = {}
    for task, h, pe in (("ego", tq.ego_h, tq.ego_pe),
                        ("agent", tq.agent_h, tq.agent_pe),
                        ("map", tq.map_h, tq.map_pe)):
        pair = kv.get(task) if kv else None
        if pair is None:
            updates[task] = h
            continue
        keys, values = pair
        q = _prenorm(h, bp.ln_tca) + pe
        updates[task] = h + mha(q, keys, values, heads, bp.tca)
    return replace(tq, ego_h=updates["ego"], agent_h=updates["agent"],
                   map_h=updates["map"])


def task_self_attention(tq, bp, heads, head_params, n_point):
    """Joint attention over [ego ‖ agent ‖ map instances]; map queries
    are aggregated to instance level first and the instance update is
    broadcast back to their points."""
    n_a = tq.agent_h.shape[0]
    d = tq.agent_h.shape[1]
    total = tq.map_h.shape[0]
    n_m = total // n_point

    x_ego = _prenorm(tq.ego_h, bp.ln_tsa)
    x_agent = _prenorm(tq.agent_h, bp.ln_tsa)
    x_map = _prenorm(tq.map_h, bp.ln_tsa)
    inst_h = aggregate_map(x_map, head_params, n_point)
    inst_pe = tq.map_pe.reshape(n_m, n_point, d).mean(axis=1)

    qk = concat([x_ego + tq.ego_pe, x_agent + tq.agent_pe, inst_h + inst_pe], axis=0)
    v = concat([x_ego, x_agent, inst_h], axis=0)
    out = mha(qk, qk, v, heads, bp.tsa)

    inst_delta = out[1 + n_a:]
    point_idx = np.repeat(np.arange(n_m), n_point)
    return replace(
        tq,
        ego_h=tq.ego_h + out[0:1],
        agent_h=tq.agent_h + out[1:1 + n_a],
        map_h=tq.map_h + inst_delta[point_idx],
    )


def _ffn(tq, bp, rate, rng):
    def apply_ffn(h):
        out = mlp_forward(_prenorm(h, bp.ln_ffn), bp.ffn)
        if rate > 0.0:
            out = dropout(out, rate, rng)
        return h + out

    return replace(tq, ego_h=apply_ffn(tq.ego_h), agent_h=apply_ffn(tq.agent_h),
                   map_h=apply_ffn(tq.map_h))


def block_forward(tq, sensor, kv, bp, heads, head_params, n_point,
                  drop_rate=0.0, rng=None):
    """One block: SCA, TCA, TSA, FFN with residuals and pre-layernorm."""
    tq = sensor_cross_attention(tq, sensor, bp, heads)
    tq = temporal_cross_attention(tq, kv, bp, heads)
    tq = task_self_attention(tq, bp, heads, head_params, n_point)
    tq = _ffn(tq, bp, drop_rate, rng)
    return tq
