"""Streaming FIFO memory of historical task queries.

Entries store raw geometric anchors (not baked PE); at read time anchors
are remapped into the current ego frame, agents get velocity-conditioned
motion compensation, and a relative time embedding is added to the keys.
History embeddings are detached: gradients never flow across frames.
"""
from collections import deque
from dataclasses import dataclass

import numpy as np

from .geometry import apply, compose, sincos_encode_rows
from .numerics import MlpParams, Tensor, ada_layer_norm, concat, mlp_forward

TASKS = ("agent", "map", "ego")


@dataclass
class QueueEntry:
    task: str
    h: np.ndarray           # (k, D) detached embeddings
    anchor: np.ndarray      # agent (k,3) centers / map (k,P,2) / ego (4,) x,y,z,yaw
    velocity: np.ndarray    # agent (k,2); empty for map/ego
    timestamp: int
    confidence: np.ndarray  # (k,)


@dataclass
class TemporalParams:
    pos_agent_mlp: MlpParams  # sincos(center) -> D
    pos_map_mlp: MlpParams    # sincos(flattened polyline) -> D
    pos_ego_mlp: MlpParams    # sincos(position) ‖ (sin,cos yaw) -> D
    ada_mlp: MlpParams        # v * dt (2,) -> 2D (gamma ‖ beta)
    temb_mlp: MlpParams       # dt seconds (1,) -> D

    def parameters(self):
        out = []
        for m in (self.pos_agent_mlp, self.pos_map_mlp, self.pos_ego_mlp,
                  self.ada_mlp, self.temb_mlp):
            out.extend(m.parameters())
        return out


class TemporalQueue:
    """Per-task bounded FIFO of top-K historical queries."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("queue capacity must be >= 1")
        self.capacity = capacity
        self.entries = {task: deque(maxlen=capacity) for task in TASKS}

    def __len__(self):
        return max(len(q) for q in self.entries.values())

    def newest_timestamp(self):
        ts = [q[-1].timestamp for q in self.entries.values() if q]
        return max(ts) if ts else None

    def clear(self):
        for q in self.entries.values():
            q.clear()

    def nbytes(self):
        total = 0
        for q in self.entries.values():
            for e in q:
                total += e.h.nbytes + e.anchor.nbytes + e.velocity.nbytes + e.confidence.nbytes
        return total

    def push_frame(self, queries, scores, k_keep, t):
        """Push the final-layer task queries of step t.

        scores: dict with 'agent' (N_a,), 'map' (N_m,) confidences and
        'agent_vel' (N_a, 2) predicted velocities. Agent/map families are
        truncated to the top k_keep by confidence; ego is kept whole.
        Oldest frames are evicted once the queue is full.
        """
        newest = self.newest_timestamp()
        if newest is not None and t <= newest:
            raise ValueError(f"non-monotone push: t={t} after {newest}")
        agent_conf = np.asarray(scores["agent"], dtype=np.float64)
        map_conf = np.asarray(scores["map"], dtype=np.float64)
        agent_vel = np.asarray(scores["agent_vel"], dtype=np.float64)

        a_idx = np.argsort(-agent_conf, kind="stable")[:k_keep]
        self.entries["agent"].append(QueueEntry(
            task="agent",
            h=queries.agent_h.data[a_idx].copy(),
            anchor=queries.agent_anchor[a_idx].copy(),
            velocity=agent_vel[a_idx].copy(),
            timestamp=t,
            confidence=agent_conf[a_idx].copy(),
        ))

        n_m = queries.map_anchor.shape[0]
        n_p = queries.map_anchor.shape[1]
        m_idx = np.argsort(-map_conf, kind="stable")[:k_keep]
        map_h_inst = queries.map_h.data.reshape(n_m, n_p, -1).mean(axis=1)
        self.entries["map"].append(QueueEntry(
            task="map",
            h=map_h_inst[m_idx].copy(),
            anchor=queries.map_anchor[m_idx].copy(),
            velocity=np.zeros((len(m_idx), 0)),
            timestamp=t,
            confidence=map_conf[m_idx].copy(),
        ))

        self.entries["ego"].append(QueueEntry(
            task="ego",
            h=queries.ego_h.data.copy(),
            anchor=np.zeros(4),  # ego origin + yaw in its own frame
            velocity=np.zeros((1, 0)),
            timestamp=t,
            confidence=np.ones(1),
        ))

    def to_state(self):
        return {
            "capacity": self.capacity,
            "entries": {
                task: [
                    {
                        "h": e.h, "anchor": e.anchor, "velocity": e.velocity,
                        "timestamp": e.timestamp, "confidence": e.confidence,
                    }
                    for e in q
                ]
                for task, q in self.entries.items()
            },
        }

    @classmethod
    def from_state(cls, state):
        q = cls(state["capacity"])
        for task, items in state["entries"].items():
            for it in items:
                q.entries[task].append(QueueEntry(
                    task=task,
                    h=np.asarray(it["h"]),
                    anchor=np.asarray(it["anchor"]),
                    velocity=np.asarray(it["velocity"]),
                    timestamp=int(it["timestamp"]),
                    confidence=np.asarray(it["confidence"]),
                ))
        return q


def build_temporal_kv(queue, t0, ego_poses, params, num_freqs, range_scale,
                      frame_period):
    """Keys/values for temporal cross attention, per task family.

    Anchors are remapped from their push-time ego frame into the frame of
    step t0 (ego_poses maps step -> ego-to-world RigidTransform); agent
    PE additionally passes velocity-conditioned ada-LN. Returns a dict
    task -> (K, V) Tensors, or task -> None when that history is empty.
    """
    out = {}
    try:
        pose_now_inv = ego_poses[t0].inverse()
    except KeyError:
        raise KeyError(f"missing ego pose for current step {t0}")
    for task in TASKS:
        entries = list(queue.entries[task])
        if not entries:
            out[task] = None
            continue
        keys, values = [], []
        for e in entries:
            if e.timestamp >= t0:
                raise ValueError("queued timestamp not older than current step")
            if e.timestamp not in ego_poses:
                raise KeyError(f"missing ego pose for queued step {e.timestamp}")
            rel = compose(pose_now_inv, ego_poses[e.timestamp])
            dt = (e.timestamp - t0) * frame_period
            h = Tensor(e.h)
            if task == "agent":
                centers = apply(rel, e.anchor)
                pe = mlp_forward(
                    Tensor(sincos_encode_rows(centers / range_scale, num_freqs)),
                    params.pos_agent_mlp)
                cond = Tensor(e.velocity * dt)
                pe = ada_layer_norm(pe, cond, params.ada_mlp)
            elif task == "map":
                k, n_p, _ = e.anchor.shape
                pts = np.concatenate(
                    [e.anchor, np.zeros((k, n_p, 1))], axis=2).reshape(-1, 3)
                moved = apply(rel, pts)[:, :2].reshape(k, n_p * 2)
                pe = mlp_forward(
                    Tensor(sincos_encode_rows(moved / range_scale, num_freqs)),
                    params.pos_map_mlp)
            else:  # ego
                pos = apply(rel, e.anchor[:3])
                yaw = e.anchor[3] + np.arctan2(rel.rotation[1, 0], rel.rotation[0, 0])
                enc = np.concatenate([
                    sincos_encode_rows((pos / range_scale)[None, :], num_freqs)[0],
                    [np.sin(yaw), np.cos(yaw)],
                ])
                pe = mlp_forward(Tensor(enc[None, :]), params.pos_ego_mlp)
            temb = mlp_forward(Tensor(np.array([[dt]])), params.temb_mlp)
            keys.append(h + pe + temb)
            values.append(h)
        out[task] = (concat(keys, axis=0), concat(values, axis=0))
    return out
