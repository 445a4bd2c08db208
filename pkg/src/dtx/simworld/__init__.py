"""Deterministic synthetic driving world: scripted scenarios, software
multi-camera rendering, expert labels, and closed-loop stepping."""
from .dynamics import EgoState, bicycle_step, pure_pursuit, rect_overlap, step_world
from .episode import (EpisodeTrace, Frame, expert_planner, run_episode,
                      zero_planner)
from .expert import expert_canbus, expert_plan, route_command
from .io import (load_labels, load_scenario, read_images, save_labels,
                 save_scenario, scenario_from_record, scenario_to_record,
                 write_images)
from .labeling import label_frame
from .path import Path
from .render import default_rig, render_frame
from .scenario import (EGO_SIZE, FAMILIES, LANE_WIDTH, Agent, Scenario,
                       generate_scenario)

__all__ = [
    "Agent", "EGO_SIZE", "EgoState", "EpisodeTrace", "FAMILIES", "Frame",
    "LANE_WIDTH", "Path", "Scenario", "bicycle_step", "default_rig",
    "expert_canbus", "expert_plan", "expert_planner", "generate_scenario",
    "label_frame", "load_labels", "load_scenario", "pure_pursuit",
    "read_images", "rect_overlap", "render_frame", "route_command",
    "run_episode", "save_labels", "save_scenario", "scenario_from_record",
    "scenario_to_record", "step_world", "write_images", "zero_planner",
]
