"""Per-block decoders: detection, motion, mapping, planning, plus the
coarse-to-fine anchor/PE refresh. One head weight set is shared across
blocks; deep supervision applies the losses at every block's output."""
from dataclasses import dataclass, replace

import numpy as np

from .config import N_PLAN_MODES
from .geometry import sincos_encode
from .numerics import MlpParams, Tensor, mlp_forward, softmax, stack
from .tokenizer import encode_agent_pe, encode_ego_pe, encode_map_pe

# plan mode indices (see config.PLAN_MODES)
MODE_STRAIGHT, MODE_STOP = 0, 1
MODE_LEFT, MODE_SHARP_LEFT = 2, 3
MODE_RIGHT, MODE_SHARP_RIGHT = 4, 5


@dataclass
class Boxes:
    center: Tensor     # (N_a, 3)
    size: Tensor       # (N_a, 3)
    heading: Tensor    # (N_a, 2) sin/cos pair
    velocity: Tensor   # (N_a, 2)
    cls_logits: Tensor  # (N_a, C+1), background last


@dataclass
class FramePredictions:
    boxes: Boxes
    motion_traj: Tensor    # (N_a, M, H, 2) agent-local frame
    motion_logits: Tensor  # (N_a, M)
    map_points: Tensor     # (N_m, P, 2)
    map_cls_logits: Tensor  # (N_m, Cm+1)
    plan_traj: Tensor      # (6, H, 2) ego frame
    plan_logits: Tensor    # (6,)

    def to_record(self):
        """Line-serializable plain-Python structure (one frame)."""
        return {
            "boxes": {
                "center": self.boxes.center.data.tolist(),
                "size": self.boxes.size.data.tolist(),
                "heading": self.boxes.heading.data.tolist(),
                "velocity": self.boxes.velocity.data.tolist(),
                "cls_logits": self.boxes.cls_logits.data.tolist(),
            },
            "motion": {
                "traj": self.motion_traj.data.tolist(),
                "logits": self.motion_logits.data.tolist(),
            },
            "map": {
                "points": self.map_points.data.tolist(),
                "cls_logits": self.map_cls_logits.data.tolist(),
            },
            "plan": {
                "traj": self.plan_traj.data.tolist(),
                "logits": self.plan_logits.data.tolist(),
            },
        }


@dataclass
class HeadParams:
    det_mlp: MlpParams        # D -> 10 + C + 1
    motion_mlp: MlpParams     # D -> M * (2H + 1)
    point_feat_mlp: MlpParams  # D -> D (point transform before max-pool)
    inst_mlp: MlpParams       # D -> D (after max-pool)
    map_point_mlp: MlpParams  # D -> 2
    map_cls_mlp: MlpParams    # D -> Cm + 1
    mode_emb_mlp: MlpParams   # sincos(mode index) -> D
    plan_traj_mlp: MlpParams  # D -> 2H
    plan_cls_mlp: MlpParams   # D -> 6

    def parameters(self):
        out = []
        for m in (self.det_mlp, self.motion_mlp, self.point_feat_mlp,
                  self.inst_mlp, self.map_point_mlp, self.map_cls_mlp,
                  self.mode_emb_mlp, self.plan_traj_mlp, self.plan_cls_mlp):
            out.extend(m.parameters())
        return out


def detect(agent_h, agent_anchor, params):
    """Decode boxes from agent queries; centers are offsets from the
    current anchors."""
    raw = mlp_forward(agent_h, params.det_mlp)
    return Boxes(
        center=Tensor(agent_anchor) + raw[:, 0:3],
        size=raw[:, 3:6],
        heading=raw[:, 6:8],
        velocity=raw[:, 8:10],
        cls_logits=raw[:, 10:],
    )


def predict_motion(agent_h, params, n_modes, horizon):
    """Multi-mode agent-local trajectories plus mode logits."""
    n = agent_h.shape[0]
    raw = mlp_forward(agent_h, params.motion_mlp)
    per_mode = 2 * horizon + 1
    raw = raw.reshape(n, n_modes, per_mode)
    traj = raw[:, :, : 2 * horizon].reshape(n, n_modes, horizon, 2)
    logits = raw[:, :, 2 * horizon]
    return traj, logits


def to_global_motion(local_traj, centers, headings):
    """Map agent-local waypoints into the ego/global frame via each
    agent's detected SE(2) pose. Plain-array inference utility.

    local_traj: (N, M, H, 2); centers: (N, 3); headings: (N, 2) sin/cos.
    """
    local_traj = np.asarray(local_traj, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    headings = np.asarray(headings, dtype=np.float64)
    norm = np.maximum(np.linalg.norm(headings, axis=1, keepdims=True), 1e-12)
    sc = headings / norm
    s, c = sc[:, 0], sc[:, 1]
    rot = np.stack([np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=1)
    out = np.einsum("nij,nmhj->nmhi", rot, local_traj)
    return out + centers[:, None, None, :2]


def aggregate_map(map_h, params, n_point):
    """Point-level -> instance-level map queries: per-point MLP, max-pool
    over the instance's points, then an instance MLP. Exactly
    permutation-invariant within each instance."""
    total, d = map_h.shape
    if total % n_point:
        raise ValueError("row count not divisible by points per instance")
    n_m = total // n_point
    feats = mlp_forward(map_h, params.point_feat_mlp).reshape(n_m, n_point, d)
    pooled = feats.max(axis=1)
    return mlp_forward(pooled, params.inst_mlp)


def decode_map(map_h, map_anchor, params, n_point):
    """Per-point 2D offsets from the point anchors + instance class."""
    n_m = map_anchor.shape[0]
    offsets = mlp_forward(map_h, params.map_point_mlp)
    points = Tensor(map_anchor.reshape(-1, 2)) + offsets
    inst = aggregate_map(map_h, params, n_point)
    cls_logits = mlp_forward(inst, params.map_cls_mlp)
    return points.reshape(n_m, n_point, 2), cls_logits


def mode_embeddings(params, num_freqs):
    """Six learned mode vectors from sincos-encoded mode indices."""
    embs = [mlp_forward(Tensor(sincos_encode([m], num_freqs)[None, :]),
                        params.mode_emb_mlp)
            for m in range(N_PLAN_MODES)]
    return stack(embs, axis=0).reshape(N_PLAN_MODES, params.mode_emb_mlp.out_dim)


def plan(ego_h, mode_embs, params, horizon):
    """Six mode-specific ego trajectories plus mode logits."""
    x = mode_embs + ego_h  # (6, D) broadcast over modes
    traj = mlp_forward(x, params.plan_traj_mlp).reshape(N_PLAN_MODES, horizon, 2)
    logits = mlp_forward(ego_h, params.plan_cls_mlp).reshape(N_PLAN_MODES)
    return traj, logits


def select_plan(plan_traj, plan_logits):
    """Highest-confidence mode; ties break toward the lowest mode index."""
    logits = plan_logits.data if isinstance(plan_logits, Tensor) else np.asarray(plan_logits)
    mode = int(np.argmax(logits))
    traj = plan_traj.data if isinstance(plan_traj, Tensor) else np.asarray(plan_traj)
    return mode, traj[mode]


def classify_mode(traj, stop_path_len=0.5, straight_max_deg=15.0, turn_max_deg=60.0):
    """Bin an ego-frame trajectory into one of the six plan modes.

    Stop if total path length < stop_path_len; otherwise the endpoint
    tangent angle decides (boundaries go to the milder class).
    """
    traj = np.asarray(traj, dtype=np.float64)
    pts = np.vstack([[0.0, 0.0], traj])
    seglens = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if seglens.sum() < stop_path_len:
        return MODE_STOP
    # endpoint tangent: last segment with nonzero length
    deltas = np.diff(pts, axis=0)
    nz = np.nonzero(seglens > 1e-12)[0]
    d = deltas[nz[-1]]
    theta = np.degrees(np.arctan2(d[1], d[0]))
    if abs(theta) <= straight_max_deg:
        return MODE_STRAIGHT
    if theta > turn_max_deg:
        return MODE_SHARP_LEFT
    if theta > 0:
        return MODE_LEFT
    if theta < -turn_max_deg:
        return MODE_SHARP_RIGHT
    return MODE_RIGHT


def agent_confidence(boxes):
    """Max foreground class probability per agent query."""
    probs = softmax(boxes.cls_logits, axis=-1).data
    return probs[:, :-1].max(axis=1)


def map_confidence(map_cls_logits):
    probs = softmax(map_cls_logits, axis=-1).data
    return probs[:, :-1].max(axis=1)


def refresh_pe(tq, preds, tok_params, cfg):
    """Coarse-to-fine update: anchors <- current predictions, PE
    recomputed from the new anchors; H passes through unchanged."""
    agent_anchor = preds.boxes.center.data.copy()
    agent_cls = preds.boxes.cls_logits.data[:, : cfg.n_agent_classes].copy()
    map_anchor = preds.map_points.data.copy()
    _, ego_anchor = select_plan(preds.plan_traj, preds.plan_logits)
    ego_anchor = ego_anchor.copy()
    return replace(
        tq,
        agent_anchor=agent_anchor,
        agent_cls=agent_cls,
        agent_pe=encode_agent_pe(agent_anchor, agent_cls, tok_params.agent_pe_mlp,
                                 cfg.num_freqs, cfg.range_xy),
        map_anchor=map_anchor,
        map_pe=encode_map_pe(map_anchor, tok_params.map_pe_mlp,
                             cfg.num_freqs, cfg.range_xy),
        ego_anchor=ego_anchor,
        ego_pe=encode_ego_pe(ego_anchor, tok_params.ego_pe_mlp,
                             cfg.num_freqs, cfg.range_xy),
    )


def decode_frame(tq, params, cfg):
    """Run all four task heads on the current layer's queries."""
    boxes = detect(tq.agent_h, tq.agent_anchor, params)
    motion_traj, motion_logits = predict_motion(
        tq.agent_h, params, cfg.n_motion_modes, cfg.motion_horizon)
    map_points, map_cls = decode_map(tq.map_h, tq.map_anchor, params, cfg.n_point)
    embs = mode_embeddings(params, cfg.num_freqs)
    plan_traj, plan_logits = plan(tq.ego_h, embs, params, cfg.plan_horizon)
    return FramePredictions(
        boxes=boxes,
        motion_traj=motion_traj,
        motion_logits=motion_logits,
        map_points=map_points,
        map_cls_logits=map_cls,
        plan_traj=plan_traj,
        plan_logits=plan_logits,
    )
