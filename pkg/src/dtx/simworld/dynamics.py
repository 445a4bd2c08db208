"""Ego dynamics: kinematic bicycle model plus a pure-pursuit tracker that
follows a planned ego-frame waypoint trajectory."""
from dataclasses import dataclass

import numpy as np

WHEELBASE = 2.8
PLAN_DT = 0.5
MAX_STEER = 0.6          # rad
ACCEL_LIMIT = 2.5        # m/s^2
DECEL_LIMIT = 4.0


@dataclass
class EgoState:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    speed: float = 0.0

    @property
    def position(self):
        return np.array([self.x, self.y])

    def copy(self):
        return EgoState(self.x, self.y, self.yaw, self.speed)


def bicycle_step(state, steer, accel, dt, wheelbase=WHEELBASE):
    """One forward-Euler step of the kinematic bicycle model."""
    v = max(0.0, state.speed + accel * dt)
    x = state.x + state.speed * np.cos(state.yaw) * dt
    y = state.y + state.speed * np.sin(state.yaw) * dt
    yaw = state.yaw + state.speed / wheelbase * np.tan(steer) * dt
    return EgoState(x, y, yaw, v)


def pure_pursuit(plan, speed, wheelbase=WHEELBASE):
    """Steering and target speed from an ego-frame waypoint plan (H, 2).

    The lookahead point is the first waypoint beyond the speed-scaled
    lookahead radius; target speed is the plan's average speed.
    """
    plan = np.asarray(plan, dtype=np.float64).reshape(-1, 2)
    pts = np.vstack([[0.0, 0.0], plan])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    path_len = float(seg.sum())
    horizon = plan.shape[0] * PLAN_DT
    target_speed = path_len / horizon if horizon > 0 else 0.0
    if path_len < 0.1:
        return 0.0, 0.0
    lookahead = max(3.0, 0.6 * speed)
    dists = np.linalg.norm(plan, axis=1)
    ahead = np.nonzero(dists >= lookahead)[0]
    tgt = plan[ahead[0]] if ahead.size else plan[-1]
    d2 = float(tgt @ tgt)
    if d2 < 1e-9:
        return 0.0, target_speed
    curvature = 2.0 * tgt[1] / d2
    steer = float(np.clip(np.arctan(wheelbase * curvature), -MAX_STEER, MAX_STEER))
    return steer, target_speed


def step_world(scn, state, plan, dt=None):
    """Advance the ego one frame by tracking the planned trajectory.

    Scripted agents are time-indexed, so only the ego state evolves.
    """
    dt = scn.frame_period if dt is None else dt
    steer, target_speed = pure_pursuit(plan, state.speed)
    accel = np.clip((target_speed - state.speed) / PLAN_DT,
                    -DECEL_LIMIT, ACCEL_LIMIT)
    return bicycle_step(state, steer, accel, dt)


def rect_overlap(c1, yaw1, lw1, c2, yaw2, lw2):
    """Separating-axis test for two oriented rectangles (length, width)."""
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)

    def axes(yaw):
        c, s = np.cos(yaw), np.sin(yaw)
        return np.array([[c, s], [-s, c]])

    a1, a2 = axes(yaw1), axes(yaw2)
    half1 = np.array(lw1, dtype=np.float64) / 2.0
    half2 = np.array(lw2, dtype=np.float64) / 2.0
    d = c2 - c1
    for ax in np.vstack([a1, a2]):
        r1 = half1 @ np.abs(a1 @ ax)
        r2 = half2 @ np.abs(a2 @ ax)
        if abs(d @ ax) > r1 + r2:
            return False
    return True
