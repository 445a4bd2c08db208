"""Dataset assembly: expert-driven episode rollouts become clips of
(images, canbus, labels, ego pose) frames for training and evaluation."""
import numpy as np

from ..simworld import (FAMILIES, default_rig, expert_planner,
                        generate_scenario, run_episode)


class Clip:
    """One episode's frames in order, plus the scenario that produced it."""

    def __init__(self, scenario, frames, cameras):
        self.scenario = scenario
        self.frames = frames
        self.cameras = cameras

    def __len__(self):
        return len(self.frames)


def rollout_clip(scenario, cfg, cameras=None, render=True):
    cameras = cameras or default_rig(cfg.image_size, n_cameras=cfg.n_cameras)
    trace = run_episode(scenario, expert_planner(scenario, cfg), cfg,
                        cameras=cameras, render=render, with_labels=True)
    return Clip(scenario, trace.frames, cameras)


def generate_clips(cfg, world, families=None, count=5, seed=0,
                   frames_per_clip=None, render=True):
    """Round-robin over families, one scenario per (family, index)."""
    families = list(families or FAMILIES)
    cameras = default_rig(cfg.image_size, n_cameras=cfg.n_cameras)
    clips = []
    for i in range(count):
        family = families[i % len(families)]
        scn = generate_scenario(family, seed + i // len(families), world)
        clip = rollout_clip(scn, cfg, cameras, render=render)
        if frames_per_clip is not None:
            clip.frames = clip.frames[:frames_per_clip]
        clips.append(clip)
    return clips


def flatten_frames(clips):
    """(clip index, frame) pairs in training order."""
    return [(ci, f) for ci, clip in enumerate(clips) for f in clip.frames]


def subsample_clips(clips, total_frames):
    """Trim clips round-robin until the total frame budget is met."""
    budget = total_frames
    out = []
    for clip in clips:
        if budget <= 0:
            break
        take = min(len(clip.frames), budget)
        trimmed = Clip(clip.scenario, clip.frames[:take], clip.cameras)
        out.append(trimmed)
        budget -= take
    if budget > 0:
        raise ValueError("not enough frames to satisfy the budget")
    return out
