"""Closed-loop episode runner shared by data generation (expert as the
planner) and closed-loop evaluation (model as the planner)."""
from dataclasses import dataclass, field

import numpy as np

from ..geometry import RigidTransform
from .dynamics import EgoState, rect_overlap, step_world
from .expert import expert_canbus, expert_plan
from .labeling import label_frame
from .render import render_frame
from .scenario import EGO_SIZE

OFFROUTE_LATERAL = 4.0


@dataclass
class Frame:
    t: int
    images: np.ndarray       # (N_c, H, W, 3) uint8, or None if not rendered
    canbus: object
    labels: object
    ego_state: EgoState
    plan: np.ndarray         # the plan that was executed from this frame

    @property
    def ego_pose(self):
        return RigidTransform.from_xy_yaw(
            self.ego_state.x, self.ego_state.y, self.ego_state.yaw)


@dataclass
class EpisodeTrace:
    frames: list = field(default_factory=list)
    collisions: int = 0
    offroute_events: int = 0
    completion: float = 0.0
    success: bool = False


def expert_planner(scn, cfg):
    """Planner callback with the expert policy's signature."""

    def plan_fn(images, canbus, ego_state, t):
        return expert_plan(scn, ego_state, t, cfg.plan_horizon, cfg.plan_dt)

    return plan_fn


def zero_planner(scn, cfg):
    def plan_fn(images, canbus, ego_state, t):
        return np.zeros((cfg.plan_horizon, 2))

    return plan_fn


def run_episode(scn, plan_fn, cfg, cameras=None, render=True, with_labels=True):
    """Roll one episode: at each frame render, plan, step, and track
    collisions / off-route excursions / route completion."""
    state = EgoState(*scn.ego_start, speed=scn.ego_speed0)
    s_start, _ = scn.path.project(state.position)
    trace = EpisodeTrace()
    in_collision = False
    off_route = False

    for t in range(scn.episode_len):
        images = render_frame(scn, state, t, cameras) if render else None
        canbus = expert_canbus(scn, state, t)
        labels = label_frame(scn, state, t, cfg) if with_labels else None
        plan = plan_fn(images, canbus, state, t)
        trace.frames.append(Frame(t, images, canbus, labels, state.copy(), plan))

        state = step_world(scn, state, plan)

        hit = any(
            rect_overlap(state.position, state.yaw, EGO_SIZE[:2],
                         a.state(t + 1)[:2], a.state(t + 1)[2], a.size[:2])
            for a in scn.agents)
        if hit and not in_collision:
            trace.collisions += 1
        in_collision = hit

        _, lat = scn.path.project(state.position)
        off = abs(lat) > OFFROUTE_LATERAL
        if off and not off_route:
            trace.offroute_events += 1
        off_route = off

    s_end, _ = scn.path.project(state.position)
    denom = max(scn.goal_s - s_start, 1e-9)
    trace.completion = float(np.clip((s_end - s_start) / denom, 0.0, 1.0))
    trace.success = trace.completion >= 0.95 and trace.collisions == 0
    return trace
