"""Sensor tokenization and task-query initialization.

Images become patch tokens with lifted-ray 3D position encodings; agent,
map, and ego query families are initialized from the learned parameter
store, uniform anchors, and the canbus vector respectively.
"""
from dataclasses import dataclass, field

import numpy as np

from .config import N_PLAN_MODES
from .geometry import ray_points, sincos_encode, sincos_encode_rows
from .numerics import MlpParams, Tensor, mlp_forward


@dataclass
class SensorTokens:
    features: Tensor  # (N_c, Hp, Wp, D)
    pe: Tensor        # same shape
    cameras: list

    def __post_init__(self):
        if self.features.shape != self.pe.shape:
            raise ValueError("feature/PE shapes differ")
        if self.features.shape[0] != len(self.cameras):
            raise ValueError("camera count mismatch")

    @property
    def count(self):
        n_c, hp, wp, _ = self.features.shape
        return n_c * hp * wp

    def flat_features(self):
        return self.features.reshape(self.count, self.features.shape[-1])

    def flat_pe(self):
        return self.pe.reshape(self.count, self.pe.shape[-1])


@dataclass
class TaskQueries:
    """Per-task semantic embeddings, position encodings, and anchors.

    Anchors are plain arrays (detached geometric state); H/PE are graph
    tensors. Map queries are point-level: (n_map * n_point, D).
    """

    agent_h: Tensor
    agent_pe: Tensor
    agent_anchor: np.ndarray   # (N_a, 3) centers
    agent_cls: np.ndarray      # (N_a, C) foreground logits
    map_h: Tensor
    map_pe: Tensor
    map_anchor: np.ndarray     # (N_m, N_point, 2)
    ego_h: Tensor              # (1, D)
    ego_pe: Tensor
    ego_anchor: np.ndarray     # (H_plan, 2) planned trajectory

    def copy_geometry(self):
        return (self.agent_anchor.copy(), self.agent_cls.copy(),
                self.map_anchor.copy(), self.ego_anchor.copy())


@dataclass
class CanbusState:
    speed: float = 0.0
    yaw_rate: float = 0.0
    steer: float = 0.0
    throttle: float = 0.0
    brake: float = 0.0
    command: np.ndarray = field(default_factory=lambda: _default_command())

    def __post_init__(self):
        self.command = np.asarray(self.command, dtype=np.float64)
        if self.command.shape != (N_PLAN_MODES,) or not np.isclose(self.command.sum(), 1.0):
            raise ValueError("command must be a one-hot over the plan modes")

    def to_vector(self):
        return np.concatenate(
            [[self.speed, self.yaw_rate, self.steer, self.throttle, self.brake],
             self.command])

    @staticmethod
    def vector_size():
        return 5 + N_PLAN_MODES


def _default_command():
    c = np.zeros(N_PLAN_MODES)
    c[0] = 1.0
    return c


@dataclass
class TokenizerParams:
    """Learned parameters for tokenization, query init, and PE refresh."""

    patch_proj: MlpParams       # patch_dim -> D, single linear layer
    sensor_pe_mlp: MlpParams    # 3*K_depth -> D
    canbus_mlp: MlpParams       # canbus vector -> D
    agent_embed: Tensor         # (N_a, D)
    map_embed: Tensor           # (N_m, D), replicated to point level
    agent_pe_mlp: MlpParams     # sincos(center) ‖ class logits -> D
    map_pe_mlp: MlpParams       # sincos(point) -> D
    ego_pe_mlp: MlpParams       # sincos(flattened plan) -> D

    def parameters(self):
        out = [self.agent_embed, self.map_embed]
        for m in (self.patch_proj, self.sensor_pe_mlp, self.canbus_mlp,
                  self.agent_pe_mlp, self.map_pe_mlp, self.ego_pe_mlp):
            out.extend(m.parameters())
        return out


def tokenize_patches(images, patch_size, proj):
    """Project non-overlapping patches of uint8 RGB images to tokens.

    images: (N_c, H, W, 3). Returns a (N_c, Hp, Wp, D) Tensor; pixel
    values are scaled to [0, 1] so an all-black image maps to the bias.
    """
    images = np.asarray(images)
    n_c, h, w, _ = images.shape
    if h % patch_size or w % patch_size:
        raise ValueError("image dims must be divisible by patch size")
    hp, wp = h // patch_size, w // patch_size
    patches = (
        images.reshape(n_c, hp, patch_size, wp, patch_size, 3)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(n_c, hp, wp, patch_size * patch_size * 3)
        .astype(np.float64)
        / 255.0
    )
    return mlp_forward(Tensor(patches), proj)


def camera_ray_features(cam, bins, patch_size):
    """Ray features for every patch center of one camera: (Hp, Wp, 3*K).

    Deterministic in the camera geometry, so callers may cache the
    result across frames.
    """
    hp, wp = cam.height // patch_size, cam.width // patch_size
    feats = np.empty((hp, wp, 3 * bins.k_depth))
    for r in range(hp):
        for c in range(wp):
            u = (c + 0.5) * patch_size
            v = (r + 0.5) * patch_size
            feats[r, c] = (ray_points(cam, (u, v), bins) / bins.d_max).reshape(-1)
    return feats


def encode_sensor_pe(cam, bins, params, patch_size, ray_feats=None):
    """3D position encoding for each patch of one camera.

    Each patch-center pixel is lifted to K_depth equally spaced ray
    points in the ego frame; their coordinates (scaled by 1/d_max) are
    concatenated and passed through the PE MLP.
    """
    if ray_feats is None:
        ray_feats = camera_ray_features(cam, bins, patch_size)
    return mlp_forward(Tensor(ray_feats), params)


def tokenize_sensors(images, cameras, bins, patch_size, params, ray_feats=None):
    """Full sensor tokenization: patch features plus per-patch 3D PE."""
    features = tokenize_patches(images, patch_size, params.patch_proj)
    if ray_feats is None:
        ray_feats = [None] * len(cameras)
    pes = [encode_sensor_pe(cam, bins, params.sensor_pe_mlp, patch_size, rf)
           for cam, rf in zip(cameras, ray_feats)]
    from .numerics import stack

    return SensorTokens(features=features, pe=stack(pes, axis=0), cameras=list(cameras))


def encode_agent_pe(anchor, cls_logits, params, num_freqs, range_scale):
    """Agent PE = MLP(sincos(center / range) ‖ class logits)."""
    enc = sincos_encode_rows(anchor / range_scale, num_freqs)
    return mlp_forward(Tensor(np.concatenate([enc, cls_logits], axis=1)), params)


def encode_map_pe(points, params, num_freqs, range_scale):
    """Point-level map PE = MLP(sincos(point / range)); points (N_m, P, 2)."""
    n_m, n_p, _ = points.shape
    enc = sincos_encode_rows(points.reshape(n_m * n_p, 2) / range_scale, num_freqs)
    return mlp_forward(Tensor(enc), params)


def encode_ego_pe(plan, params, num_freqs, range_scale):
    """Ego PE = MLP(sincos of the flattened planned trajectory)."""
    enc = sincos_encode(plan.reshape(-1) / range_scale, num_freqs)
    return mlp_forward(Tensor(enc[None, :]), params)


def _segment_anchors(rng, n_map, n_point, range_xy):
    """Initial map anchors: straight segments uniformly placed and
    oriented inside the perception box. Coherent segments keep the
    polyline matching stable and the required per-point offsets small.
    """
    centers = rng.uniform(-range_xy, range_xy, (n_map, 2))
    headings = rng.uniform(0.0, 2.0 * np.pi, n_map)
    half = 0.5 * range_xy
    s = np.linspace(-half, half, n_point)
    dirs = np.stack([np.cos(headings), np.sin(headings)], axis=1)
    pts = centers[:, None, :] + s[None, :, None] * dirs[:, None, :]
    return np.clip(pts, -range_xy, range_xy)


def init_task_queries(cfg, canbus, params, seed=0):
    """Initial TaskQueries: learned embeddings, uniform anchors in the
    perception range (deterministic per seed), canbus-seeded ego query,
    all-zero ego PE."""
    cfg.validate()
    rng = np.random.default_rng(seed)
    agent_anchor = np.column_stack([
        rng.uniform(-cfg.range_xy, cfg.range_xy, cfg.n_agent),
        rng.uniform(-cfg.range_xy, cfg.range_xy, cfg.n_agent),
        rng.uniform(cfg.range_z_min, cfg.range_z_max, cfg.n_agent),
    ])
    agent_cls = np.zeros((cfg.n_agent, cfg.n_agent_classes))
    map_anchor = _segment_anchors(rng, cfg.n_map, cfg.n_point, cfg.range_xy)
    ego_anchor = np.zeros((cfg.plan_horizon, 2))

    point_idx = np.repeat(np.arange(cfg.n_map), cfg.n_point)
    return TaskQueries(
        agent_h=params.agent_embed,
        agent_pe=encode_agent_pe(agent_anchor, agent_cls, params.agent_pe_mlp,
                                 cfg.num_freqs, cfg.range_xy),
        agent_anchor=agent_anchor,
        agent_cls=agent_cls,
        map_h=params.map_embed[point_idx],
        map_pe=encode_map_pe(map_anchor, params.map_pe_mlp, cfg.num_freqs, cfg.range_xy),
        map_anchor=map_anchor,
        ego_h=mlp_forward(Tensor(canbus.to_vector()[None, :]), params.canbus_mlp),
        ego_pe=Tensor(np.zeros((1, cfg.hidden))),
        ego_anchor=ego_anchor,
    )
