"""Privileged expert policy: lane following with time-headway braking.

The expert reads scripted agent futures directly (it never looks at
rendered images), which makes it the label source and the closed-loop
control baseline.
"""
import numpy as np

from ..heads import classify_mode
from ..tokenizer import CanbusState
from .dynamics import ACCEL_LIMIT, DECEL_LIMIT
from .scenario import LANE_WIDTH

HEADWAY_TIME = 1.2       # s
STANDOFF = 4.0           # m kept clear behind a lead vehicle
LAT_MAX_ACCEL = 2.5      # m/s^2 comfort limit in curves
CONFLICT_LOOKAHEAD = 40.0


def _lead_gap(scn, s_ego, t_frame):
    """Bumper gap to the nearest scripted agent ahead in the ego corridor,
    at absolute frame t_frame; inf if the corridor is clear."""
    best = np.inf
    for agent in scn.agents:
        x, y, _, _ = agent.state(t_frame)
        s, lat = scn.path.project((x, y))
        ds = s - s_ego
        if abs(lat) < LANE_WIDTH / 2 and 0.0 < ds < CONFLICT_LOOKAHEAD:
            gap = ds - agent.size[0] / 2.0 - 2.3  # minus half ego length
            best = min(best, gap)
    return best


def _allowed_speed(scn, s, v_now, t_frame):
    v = scn.cruise_speed
    kappa = max(scn.path.curvature(s + 2.0), scn.path.curvature(s + 6.0))
    if kappa > 1e-4:
        v = min(v, np.sqrt(LAT_MAX_ACCEL / kappa))
    gap = _lead_gap(scn, s, t_frame)
    if np.isfinite(gap):
        v = min(v, max(0.0, (gap - STANDOFF) / HEADWAY_TIME))
    return v


def expert_plan(scn, ego_state, t_frame, horizon=6, plan_dt=0.5):
    """Planned ego-frame waypoints by rolling the headway rule along the
    route against the scripted agent futures."""
    s, _ = scn.path.project(ego_state.position)
    v = ego_state.speed
    frames_per_step = max(int(round(plan_dt / scn.frame_period)), 1)
    world_pts = []
    for h in range(1, horizon + 1):
        t_abs = t_frame + h * frames_per_step
        v_target = _allowed_speed(scn, s, v, t_abs)
        dv = np.clip(v_target - v, -DECEL_LIMIT * plan_dt, ACCEL_LIMIT * plan_dt)
        v = max(0.0, v + dv)
        s = min(s + v * plan_dt, scn.path.length)
        world_pts.append(scn.path.position(s))
    world_pts = np.array(world_pts)
    c, sn = np.cos(ego_state.yaw), np.sin(ego_state.yaw)
    rel = world_pts - ego_state.position
    plan = np.column_stack([c * rel[:, 0] + sn * rel[:, 1],
                            -sn * rel[:, 0] + c * rel[:, 1]])
    return plan


def route_command(scn, ego_state, lookahead=18.0, n_samples=6):
    """Navigation command from the route geometry ahead (ignores traffic,
    so a braking expert still commands the route intent)."""
    s0, _ = scn.path.project(ego_state.position)
    ss = s0 + np.linspace(lookahead / n_samples, lookahead, n_samples)
    pts = np.array([scn.path.position(min(s, scn.path.length)) for s in ss])
    c, sn = np.cos(ego_state.yaw), np.sin(ego_state.yaw)
    rel = pts - ego_state.position
    local = np.column_stack([c * rel[:, 0] + sn * rel[:, 1],
                             -sn * rel[:, 0] + c * rel[:, 1]])
    mode = classify_mode(local)
    onehot = np.zeros(6)
    onehot[mode] = 1.0
    return onehot


def expert_canbus(scn, ego_state, t_frame, yaw_rate=0.0, steer=0.0):
    v_allowed = _allowed_speed(
        scn, scn.path.project(ego_state.position)[0], ego_state.speed, t_frame)
    accel = np.clip(v_allowed - ego_state.speed, -1.0, 1.0)
    return CanbusState(
        speed=float(ego_state.speed),
        yaw_rate=float(yaw_rate),
        steer=float(steer),
        throttle=float(max(accel, 0.0)),
        brake=float(max(-accel, 0.0)),
        command=route_command(scn, ego_state),
    )
