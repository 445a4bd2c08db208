"""Deterministic scenario generation for five scripted families.

Every agent's full state sequence is precomputed at generation time, so a
scenario is a pure function of (family, seed): rendering, labels, and
closed-loop stepping all read from the same scripts.
"""
from dataclasses import dataclass, field

import numpy as np

from ..config import AGENT_CLASSES, MAP_CLASSES, WorldConfig
from .path import Path

FAMILIES = ("cut_in", "emergency_brake", "merge", "turn", "straight")

LANE_WIDTH = 3.5
ROAD_HALF_WIDTH = 5.25
EGO_SIZE = np.array([4.6, 2.0, 1.6])  # length, width, height (m)
CAR_SIZE = np.array([4.4, 1.9, 1.5])
TRUCK_SIZE = np.array([6.5, 2.4, 2.6])
CRUISE_SPEED = 6.0
MAX_ACCEL = 2.5
MAX_DECEL = 4.0
SCRIPT_MARGIN = 40  # extra scripted frames beyond the episode (label horizons)


@dataclass
class Agent:
    size: np.ndarray      # (3,) length, width, height
    cls: int              # index into AGENT_CLASSES
    states: np.ndarray    # (T_script, 4) world-frame x, y, yaw, speed

    def state(self, t):
        t = min(max(t, 0), self.states.shape[0] - 1)
        return self.states[t]


@dataclass
class Scenario:
    family: str
    seed: int
    map_polylines: list          # [(points (N,2) world frame, class id)]
    agents: list                 # [Agent]
    route: np.ndarray            # dense ego route waypoints, world frame
    ego_start: np.ndarray        # (3,) x, y, yaw
    ego_speed0: float
    cruise_speed: float
    goal_s: float                # arc length along route = full completion
    episode_len: int
    frame_period: float
    _path: Path = field(default=None, repr=False, compare=False)

    @property
    def path(self):
        if self._path is None:
            self._path = Path(self.route)
        return self._path

    @property
    def duration(self):
        return self.episode_len * self.frame_period

    def conflict_agents(self):
        """Agents whose scripted lateral offset to the route enters the
        ego corridor at any point during the episode."""
        out = []
        for a in self.agents:
            for t in range(0, self.episode_len, 2):
                s, lat = self.path.project(a.state(t)[:2])
                if abs(lat) < LANE_WIDTH / 2 and 0.0 < s < self.path.length:
                    out.append(a)
                    break
        return out


def _integrate_script(n, dt, x0, y_of_t, speed_of_t):
    """Longitudinal integration along +x with a scripted lateral profile."""
    t = np.arange(n) * dt
    v = np.array([speed_of_t(tt) for tt in t])
    x = x0 + np.concatenate([[0.0], np.cumsum(v[:-1] * dt)])
    y = np.array([y_of_t(tt) for tt in t])
    dx = np.gradient(x, dt)
    dy = np.gradient(y, dt)
    yaw = np.arctan2(dy, np.maximum(dx, 1e-6))
    return np.column_stack([x, y, yaw, v])


def _blend(t, t0, dur, a, b):
    """Cosine ease from a to b over [t0, t0 + dur]."""
    if t <= t0:
        return a
    if t >= t0 + dur:
        return b
    u = (t - t0) / dur
    return a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * u))


def _straight_route(length=140.0):
    xs = np.arange(0.0, length + 1.0, 1.0)
    return np.column_stack([xs, np.zeros_like(xs)])


def _turn_route(direction, turn_x=20.0, radius=8.0, tail=60.0):
    """Straight to turn_x, quarter-circle arc, then straight."""
    xs = np.arange(0.0, turn_x + 0.5, 0.5)
    pre = np.column_stack([xs, np.zeros_like(xs)])
    ang = np.linspace(0.0, np.pi / 2, 26)[1:]
    cx, cy = turn_x, direction * radius
    arc_x = cx + radius * np.sin(ang)
    arc_y = cy - direction * radius * np.cos(ang)
    arc = np.column_stack([arc_x, arc_y])
    end = arc[-1]
    ts = np.arange(0.5, tail + 0.5, 0.5)
    post = np.column_stack([end[0] + 0 * ts, end[1] + direction * ts])
    return np.vstack([pre, arc, post])


def _estimate_expert_distance(family, duration, cruise):
    """Distance the expert covers accelerating from rest, with a family
    fudge for braking/turn slowdowns; sets the route-completion goal."""
    t_acc = cruise / MAX_ACCEL
    if duration <= t_acc:
        d = 0.5 * MAX_ACCEL * duration ** 2
    else:
        d = 0.5 * MAX_ACCEL * t_acc ** 2 + cruise * (duration - t_acc)
    fudge = {"straight": 1.0, "turn": 0.7, "cut_in": 0.85,
             "emergency_brake": 0.5, "merge": 0.85}[family]
    return d * fudge


def generate_scenario(family, seed, world=None):
    """Deterministic scenario for one of the five families."""
    if family not in FAMILIES:
        raise ValueError(f"unknown scenario family {family!r}")
    world = world or WorldConfig()
    rng = np.random.default_rng([FAMILIES.index(family), int(seed)])
    dt = world.frame_period
    n = world.episode_len + SCRIPT_MARGIN
    cruise = CRUISE_SPEED

    if family == "turn":
        direction = 1.0 if seed % 2 == 0 else -1.0
        route = _turn_route(direction)
    else:
        route = _straight_route()
    path = Path(route)

    # map: ego centerline, left-lane centerline, two boundaries
    cl_cls = MAP_CLASSES.index("centerline")
    bd_cls = MAP_CLASSES.index("boundary")
    cr_cls = MAP_CLASSES.index("crossing")
    map_polylines = [
        (path.resample(1.0), cl_cls),
        (Path(path.offset(LANE_WIDTH)).resample(1.0), cl_cls),
        (Path(path.offset(ROAD_HALF_WIDTH)).resample(1.0), bd_cls),
        (Path(path.offset(-ROAD_HALF_WIDTH)).resample(1.0), bd_cls),
    ]
    if family == "turn":
        s_cross = 16.0
        p = path.position(s_cross)
        h = path.heading(s_cross)
        nvec = np.array([-np.sin(h), np.cos(h)])
        lat = np.linspace(-ROAD_HALF_WIDTH, ROAD_HALF_WIDTH, 9)
        map_polylines.append((p + lat[:, None] * nvec, cr_cls))

    agents = []

    def car(states):
        agents.append(Agent(CAR_SIZE.copy(), AGENT_CLASSES.index("car"), states))

    if family == "straight":
        x0 = 12.0 + rng.uniform(0.0, 6.0)
        v = cruise * rng.uniform(0.9, 1.1)
        car(_integrate_script(n, dt, x0, lambda t: LANE_WIDTH, lambda t: v))
    elif family == "cut_in":
        x0 = 14.0 + rng.uniform(0.0, 4.0)
        t1 = 1.0 + rng.uniform(0.0, 0.5)
        dur = 2.0
        car(_integrate_script(
            n, dt, x0,
            lambda t: _blend(t, t1, dur, LANE_WIDTH, 0.0),
            lambda t: _blend(t, t1, dur, 6.5, 4.5)))
    elif family == "emergency_brake":
        x0 = 18.0 + rng.uniform(0.0, 4.0)
        t1 = 1.0 + rng.uniform(0.0, 0.5)
        car(_integrate_script(
            n, dt, x0, lambda t: 0.0,
            lambda t: max(0.0, cruise - 5.0 * max(0.0, t - t1))))
    elif family == "merge":
        x0 = 12.0 + rng.uniform(0.0, 4.0)
        car(_integrate_script(
            n, dt, x0,
            lambda t: _blend(t, 0.5, 2.5, -7.0, 0.0),
            lambda t: _blend(t, 0.5, 2.5, 5.5, 4.8)))
    elif family == "turn":
        x0 = 10.0 + rng.uniform(0.0, 5.0)
        car(_integrate_script(n, dt, x0, lambda t: LANE_WIDTH, lambda t: 5.0))

    # roadside parked truck for scene variety (never a conflict)
    s_truck = 25.0 + rng.uniform(0.0, 10.0)
    h_truck = path.heading(s_truck)
    p_truck = (path.position(s_truck)
               - 6.8 * np.array([-np.sin(h_truck), np.cos(h_truck)]))
    parked = np.tile([p_truck[0], p_truck[1], h_truck, 0.0], (n, 1))
    agents.append(Agent(TRUCK_SIZE.copy(), AGENT_CLASSES.index("truck"), parked))

    ego_start = np.array([5.0, 0.0, 0.0])
    s0, _ = path.project(ego_start[:2])
    goal_s = s0 + _estimate_expert_distance(family, world.episode_len * dt, cruise)

    return Scenario(
        family=family, seed=int(seed), map_polylines=map_polylines,
        agents=agents, route=route, ego_start=ego_start, ego_speed0=0.0,
        cruise_speed=cruise, goal_s=min(goal_s, path.length),
        episode_len=world.episode_len, frame_period=dt)
