"""Ground-truth labels in the conventions the losses expect: boxes and
map polylines in the current ego frame, agent futures in each agent's own
local frame, and the expert plan as the ego trajectory target."""
import numpy as np

from ..labels import FrameLabels
from .expert import expert_canbus, expert_plan
from .path import Path


def _to_ego(points, ego_state):
    """World (N, 2) -> ego frame."""
    c, s = np.cos(ego_state.yaw), np.sin(ego_state.yaw)
    rel = np.asarray(points, dtype=np.float64) - ego_state.position
    return np.column_stack([c * rel[:, 0] + s * rel[:, 1],
                            -s * rel[:, 0] + c * rel[:, 1]])


def _clip_polyline(pts_ego, range_xy, n_point):
    """Contiguous in-range runs of a dense ego-frame polyline, each
    resampled to n_point points; drops slivers shorter than 1 m."""
    inside = (np.abs(pts_ego[:, 0]) <= range_xy) & (np.abs(pts_ego[:, 1]) <= range_xy)
    runs = []
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(inside)))
    out = []
    for a, b in runs:
        if b - a < 2:
            continue
        seg = Path(pts_ego[a:b])
        if seg.length < 1.0:
            continue
        ss = np.linspace(0.0, seg.length, n_point)
        out.append(np.array([seg.position(s) for s in ss]))
    return out


def label_frame(scn, ego_state, t, cfg):
    """FrameLabels for frame t given the current (possibly closed-loop)
    ego state."""
    frames_per_step = max(int(round(cfg.motion_dt / scn.frame_period)), 1)

    centers, sizes, yaws, vels, clss, futures = [], [], [], [], [], []
    for agent in scn.agents:
        x, y, yaw, speed = agent.state(t)
        local = _to_ego([[x, y]], ego_state)[0]
        if abs(local[0]) > cfg.range_xy or abs(local[1]) > cfg.range_xy:
            continue
        centers.append([local[0], local[1], agent.size[2] / 2.0])
        sizes.append(agent.size)
        yaws.append(yaw - ego_state.yaw)
        v_world = speed * np.array([np.cos(yaw), np.sin(yaw)])
        c, s = np.cos(ego_state.yaw), np.sin(ego_state.yaw)
        vels.append([c * v_world[0] + s * v_world[1],
                     -s * v_world[0] + c * v_world[1]])
        clss.append(agent.cls)
        # future in the agent's local frame at time t
        ca, sa = np.cos(yaw), np.sin(yaw)
        fut = []
        for h in range(1, cfg.motion_horizon + 1):
            fx, fy, _, _ = agent.state(t + h * frames_per_step)
            dx, dy = fx - x, fy - y
            fut.append([ca * dx + sa * dy, -sa * dx + ca * dy])
        futures.append(fut)

    map_pts, map_cls = [], []
    for pts, cls in scn.map_polylines:
        for piece in _clip_polyline(_to_ego(pts, ego_state), cfg.range_xy, cfg.n_point):
            map_pts.append(piece)
            map_cls.append(cls)

    plan = expert_plan(scn, ego_state, t, cfg.plan_horizon, cfg.plan_dt)
    canbus = expert_canbus(scn, ego_state, t)

    g = len(centers)
    gm = len(map_pts)
    return FrameLabels(
        boxes_center=np.array(centers).reshape(g, 3),
        boxes_size=np.array(sizes, dtype=np.float64).reshape(g, 3),
        boxes_yaw=np.array(yaws, dtype=np.float64),
        boxes_velocity=np.array(vels).reshape(g, 2),
        boxes_cls=np.array(clss, dtype=np.int64),
        motion_local=np.array(futures, dtype=np.float64).reshape(
            g, cfg.motion_horizon, 2),
        map_points=np.array(map_pts, dtype=np.float64).reshape(
            gm, cfg.n_point, 2),
        map_cls=np.array(map_cls, dtype=np.int64),
        plan=plan,
        canbus=canbus,
    )
