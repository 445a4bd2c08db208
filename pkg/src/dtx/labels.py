"""Ground-truth frame labels shared between the sim world (producer) and
the losses/metrics (consumers). All geometry is in the current ego frame
except agent futures, which live in each agent's local frame."""
from dataclasses import dataclass, field

import numpy as np


@dataclass
class FrameLabels:
    boxes_center: np.ndarray    # (G, 3)
    boxes_size: np.ndarray      # (G, 3)
    boxes_yaw: np.ndarray       # (G,)
    boxes_velocity: np.ndarray  # (G, 2) ego-frame vx, vy
    boxes_cls: np.ndarray       # (G,) int class ids
    motion_local: np.ndarray    # (G, H_m, 2) agent-local futures
    map_points: np.ndarray      # (Gm, P, 2)
    map_cls: np.ndarray         # (Gm,) int class ids
    plan: np.ndarray            # (H_plan, 2) expert ego future
    canbus: object = None       # CanbusState

    @property
    def n_agents(self):
        return self.boxes_center.shape[0]

    @property
    def n_map(self):
        return self.map_points.shape[0]

    def to_record(self):
        return {
            "boxes_center": self.boxes_center.tolist(),
            "boxes_size": self.boxes_size.tolist(),
            "boxes_yaw": self.boxes_yaw.tolist(),
            "boxes_velocity": self.boxes_velocity.tolist(),
            "boxes_cls": self.boxes_cls.tolist(),
            "motion_local": self.motion_local.tolist(),
            "map_points": self.map_points.tolist(),
            "map_cls": self.map_cls.tolist(),
            "plan": self.plan.tolist(),
        }

    @classmethod
    def from_record(cls, rec, canbus=None):
        return cls(
            boxes_center=np.asarray(rec["boxes_center"], dtype=np.float64).reshape(-1, 3),
            boxes_size=np.asarray(rec["boxes_size"], dtype=np.float64).reshape(-1, 3),
            boxes_yaw=np.asarray(rec["boxes_yaw"], dtype=np.float64),
            boxes_velocity=np.asarray(rec["boxes_velocity"], dtype=np.float64).reshape(-1, 2),
            boxes_cls=np.asarray(rec["boxes_cls"], dtype=np.int64),
            motion_local=np.asarray(rec["motion_local"], dtype=np.float64),
            map_points=np.asarray(rec["map_points"], dtype=np.float64),
            map_cls=np.asarray(rec["map_cls"], dtype=np.int64),
            plan=np.asarray(rec["plan"], dtype=np.float64).reshape(-1, 2),
            canbus=canbus,
        )
