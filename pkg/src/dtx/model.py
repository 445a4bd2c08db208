"""The full stacked model: parameter construction, per-frame forward with
deep supervision, and a named parameter table for checkpointing."""
from dataclasses import fields as dataclass_fields, is_dataclass

import numpy as np

from .blocks import BlockParams, block_forward
from .config import N_PLAN_MODES, ModelConfig
from .geometry import DepthBins
from .heads import (HeadParams, agent_confidence, decode_frame, map_confidence,
                    refresh_pe)
from .numerics import MlpParams, Tensor
from .temporal import TemporalParams, TemporalQueue, build_temporal_kv
from .tokenizer import (CanbusState, TokenizerParams, camera_ray_features,
                        init_task_queries, tokenize_sensors)


class DriveTransformer:
    """Parallel-task transformer over sensor tokens, task queries, and a
    streaming temporal queue."""

    def __init__(self, cfg: ModelConfig, seed=0):
        cfg.validate()
        self.cfg = cfg
        self.seed = seed
        rng = np.random.default_rng(seed)
        d = cfg.hidden
        f = cfg.num_freqs
        patch_dim = cfg.patch_size * cfg.patch_size * 3
        self.bins = DepthBins(cfg.k_depth, cfg.d_min, cfg.range_xy)

        def embed(n):
            limit = np.sqrt(6.0 / (2 * d))
            return Tensor(rng.uniform(-limit, limit, (n, d)), requires_grad=True)

        self.tokenizer = TokenizerParams(
            patch_proj=MlpParams.create(rng, [patch_dim, d], activation="identity"),
            sensor_pe_mlp=MlpParams.create(rng, [3 * cfg.k_depth, d, d]),
            canbus_mlp=MlpParams.create(rng, [CanbusState.vector_size(), d, d]),
            agent_embed=embed(cfg.n_agent),
            map_embed=embed(cfg.n_map),
            agent_pe_mlp=MlpParams.create(rng, [6 * f + cfg.n_agent_classes, d, d]),
            map_pe_mlp=MlpParams.create(rng, [4 * f, d, d]),
            ego_pe_mlp=MlpParams.create(rng, [4 * f * cfg.plan_horizon, d, d]),
        )
        self.temporal = TemporalParams(
            pos_agent_mlp=MlpParams.create(rng, [6 * f, d, d]),
            pos_map_mlp=MlpParams.create(rng, [4 * f * cfg.n_point, d, d]),
            pos_ego_mlp=MlpParams.create(rng, [6 * f + 2, d, d]),
            ada_mlp=MlpParams.create(rng, [2, d, 2 * d]),
            temb_mlp=MlpParams.create(rng, [1, d]),
        )
        # ada-LN starts as identity modulation (gamma=1, beta=0)
        self.temporal.ada_mlp.biases[-1].data[:d] = 1.0

        self.blocks = [BlockParams.create(rng, d) for _ in range(cfg.num_layers)]
        c = cfg.n_agent_classes
        self.heads = HeadParams(
            det_mlp=MlpParams.create(rng, [d, d, 10 + c + 1]),
            motion_mlp=MlpParams.create(
                rng, [d, d, cfg.n_motion_modes * (2 * cfg.motion_horizon + 1)]),
            point_feat_mlp=MlpParams.create(rng, [d, d]),
            inst_mlp=MlpParams.create(rng, [d, d]),
            map_point_mlp=MlpParams.create(rng, [d, d, 2]),
            map_cls_mlp=MlpParams.create(rng, [d, d, cfg.n_map_classes + 1]),
            mode_emb_mlp=MlpParams.create(rng, [2 * f, d]),
            plan_traj_mlp=MlpParams.create(rng, [d, d, 2 * cfg.plan_horizon]),
            plan_cls_mlp=MlpParams.create(rng, [d, d, N_PLAN_MODES]),
        )
        # small-init the final head layers so the outputs start near the
        # anchors and the classification logits start near uniform
        for mlp in (self.heads.det_mlp, self.heads.motion_mlp,
                    self.heads.map_point_mlp, self.heads.map_cls_mlp,
                    self.heads.plan_traj_mlp, self.heads.plan_cls_mlp):
            mlp.weights[-1].data *= 0.1
        self._ray_cache = None

    # -- parameters --------------------------------------------------------

    def named_parameters(self):
        out = {}

        def walk(prefix, obj):
            if isinstance(obj, Tensor):
                out[prefix] = obj
            elif isinstance(obj, MlpParams):
                for i, (w, b) in enumerate(zip(obj.weights, obj.biases)):
                    out[f"{prefix}.w{i}"] = w
                    out[f"{prefix}.b{i}"] = b
            elif is_dataclass(obj):
                for fld in dataclass_fields(obj):
                    walk(f"{prefix}.{fld.name}", getattr(obj, fld.name))
            elif isinstance(obj, (list, tuple)):
                for i, item in enumerate(obj):
                    walk(f"{prefix}.{i}", item)

        walk("tokenizer", self.tokenizer)
        walk("temporal", self.temporal)
        walk("blocks", self.blocks)
        walk("heads", self.heads)
        return out

    def parameters(self):
        return list(self.named_parameters().values())

    def num_parameters(self):
        return sum(p.size for p in self.parameters())

    def load_parameter_table(self, table):
        named = self.named_parameters()
        if set(named) != set(table):
            missing = set(named) ^ set(table)
            raise ValueError(f"parameter table mismatch: {sorted(missing)[:5]}")
        for name, arr in table.items():
            if named[name].data.shape != arr.shape:
                raise ValueError(f"shape mismatch for {name}")
            named[name].data = np.array(arr, dtype=np.float64)

    # -- forward -----------------------------------------------------------

    def make_queue(self):
        return TemporalQueue(self.cfg.t_queue)

    def _ray_features(self, cameras):
        key = tuple((cam.intrinsics.tobytes(), cam.extrinsics.mat.tobytes(),
                     cam.width, cam.height) for cam in cameras)
        if self._ray_cache is None or self._ray_cache[0] != key:
            feats = [camera_ray_features(cam, self.bins, self.cfg.patch_size)
                     for cam in cameras]
            self._ray_cache = (key, feats)
        return self._ray_cache[1]

    def forward(self, images, cameras, canbus, queue=None, ego_poses=None,
                t0=0, train=False, rng=None, cache_rays=True):
        """One frame: tokenize, run all blocks with per-block decode and
        coarse-to-fine refresh, return (per-layer predictions, final
        queries)."""
        cfg = self.cfg
        rays = self._ray_features(cameras) if cache_rays else None
        sensor = tokenize_sensors(images, cameras, self.bins, cfg.patch_size,
                                  self.tokenizer, ray_feats=rays)
        tq = init_task_queries(cfg, canbus, self.tokenizer, seed=self.seed)
        kv = None
        if queue is not None and len(queue) > 0:
            kv = build_temporal_kv(queue, t0, ego_poses, self.temporal,
                                   cfg.num_freqs, cfg.range_xy, cfg.frame_period)
        drop = cfg.dropout if train else 0.0
        per_layer = []
        for bp in self.blocks:
            tq = block_forward(tq, sensor, kv, bp, cfg.heads, self.heads,
                               cfg.n_point, drop_rate=drop, rng=rng)
            preds = decode_frame(tq, self.heads, cfg)
            per_layer.append(preds)
            tq = refresh_pe(tq, preds, self.tokenizer, cfg)
        return per_layer, tq

    def push_queue(self, queue, tq, preds, t):
        """Push the final-layer queries into the temporal queue using the
        detection/mapping confidences of the last block.

        Stored embeddings are whitened per query. The queue feeds the next
        frame's residual stream through temporal cross attention, so
        storing raw residual-stream activations would let magnitudes
        compound frame over frame across an episode.
        """
        from dataclasses import replace

        def whiten(h):
            x = h.data
            mu = x.mean(axis=-1, keepdims=True)
            var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
            return Tensor((x - mu) / np.sqrt(var + 1e-5))

        stored = replace(tq, ego_h=whiten(tq.ego_h), agent_h=whiten(tq.agent_h),
                         map_h=whiten(tq.map_h))
        scores = {
            "agent": agent_confidence(preds.boxes),
            "map": map_confidence(preds.map_cls_logits),
            "agent_vel": preds.boxes.velocity.data,
        }
        queue.push_frame(stored, scores, self.cfg.k_keep, t)
