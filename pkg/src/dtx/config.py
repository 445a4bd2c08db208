"""Model / training / world configuration.

Presets follow the published size ladder: Small = 3 layers x 256 hidden,
Base = 6 x 512, Large = 12 x 768. Query counts default to the full-scale
settings (900 agent / 100 map queries, queue length 10, top-K 50); desk
runs override them via config files.
"""
from dataclasses import dataclass, field, asdict, replace

# Plan-mode vocabulary; order is load-bearing (classification targets,
# navigation command one-hot, tie-break toward the lower index).
PLAN_MODES = (
    "go_straight",
    "stop",
    "left_turn",
    "sharp_left_turn",
    "right_turn",
    "sharp_right_turn",
)
N_PLAN_MODES = len(PLAN_MODES)

AGENT_CLASSES = ("car", "truck")
MAP_CLASSES = ("centerline", "boundary", "crossing")

PRESETS = {
    "small": (3, 256),
    "base": (6, 512),
    "large": (12, 768),
}


@dataclass
class ModelConfig:
    num_layers: int = 3
    hidden: int = 256
    heads: int = 8
    n_agent: int = 900
    n_map: int = 100
    n_point: int = 8
    t_queue: int = 10
    k_keep: int = 50
    frame_period: float = 0.1  # seconds; queue runs at 10 Hz
    # perception range (ego frame, meters)
    range_xy: float = 32.0
    range_z_min: float = -3.0
    range_z_max: float = 5.0
    # heads
    plan_horizon: int = 6
    plan_dt: float = 0.5
    motion_horizon: int = 6
    motion_dt: float = 0.5
    n_motion_modes: int = 6
    # plan-mode thresholds (meters / degrees)
    stop_path_len: float = 0.5
    straight_max_deg: float = 15.0
    turn_max_deg: float = 60.0
    # sensor tokenization
    n_cameras: int = 4
    image_size: int = 96
    patch_size: int = 16
    k_depth: int = 8
    d_min: float = 1.0
    num_freqs: int = 4
    dropout: float = 0.0

    @classmethod
    def preset(cls, name, **overrides):
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}")
        layers, hidden = PRESETS[name]
        kwargs = dict(num_layers=layers, hidden=hidden)
        kwargs.update(overrides)
        return cls(**kwargs)

    @classmethod
    def desk(cls, name="small", **overrides):
        """Preset sized for laptop-scale training runs."""
        desk = dict(n_agent=24, n_map=8, n_point=6, heads=4)
        desk.update(overrides)
        return cls.preset(name, **desk)

    def validate(self):
        if self.hidden % self.heads != 0:
            raise ValueError("hidden must be divisible by heads")
        for name in ("n_agent", "n_map", "n_point", "num_layers"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.image_size % self.patch_size != 0:
            raise ValueError("image size must be divisible by patch size")
        return self

    @property
    def n_agent_classes(self):
        return len(AGENT_CLASSES)

    @property
    def n_map_classes(self):
        return len(MAP_CLASSES)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class LossWeights:
    w_detection: float = 1.0
    w_motion: float = 1.0
    w_mapping: float = 1.0
    w_planning: float = 1.0
    cls_weight: float = 2.0
    reg_weight: float = 5.0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class TrainConfig:
    lr: float = 1e-4
    weight_decay: float = 0.05
    dropout: float = 0.1
    schedule: str = "cosine"
    epochs: int = 1
    batch_size: int = 4
    steps: int = 500
    seed: int = 0
    preset: str = "small"

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class WorldConfig:
    episode_len: int = 40
    frame_period: float = 0.1
    fov_deg: float = 60.0
    image_size: int = 96
    n_cameras: int = 4

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
