"""Open-loop and closed-loop evaluation drivers built on the pure
metric functions."""
import numpy as np

from ..heads import select_plan, to_global_motion
from ..numerics import no_grad, softmax
from ..simworld import run_episode
from . import metrics as M

COLLISION_PENALTY = 0.6
OFFROUTE_PENALTY = 0.7


def _frame_records(preds, labels, cfg):
    """Convert one frame's final-layer predictions + labels into the
    record shapes the metric functions consume."""
    cls_probs = softmax(preds.boxes.cls_logits, axis=-1).data
    conf = cls_probs[:, :-1].max(axis=1)
    p_cls = cls_probs[:, :-1].argmax(axis=1)
    det_pred = {"centers": preds.boxes.center.data[:, :2],
                "conf": conf, "cls": p_cls}
    det_gt = {"centers": labels.boxes_center[:, :2], "cls": labels.boxes_cls}

    # motion samples: greedy-match GT agents to predictions at 2 m
    motion = []
    match = M._greedy_match(det_pred["centers"], conf,
                            det_gt["centers"], M.MOTION_MATCH_RADIUS)
    matched_of_gt = {int(j): i for i, j in enumerate(match) if j >= 0}
    pred_global = to_global_motion(preds.motion_traj.data,
                                   preds.boxes.center.data,
                                   preds.boxes.heading.data)
    for g in range(labels.n_agents):
        ca, sa = np.cos(labels.boxes_yaw[g]), np.sin(labels.boxes_yaw[g])
        rot = np.array([[ca, -sa], [sa, ca]])
        gt_global = labels.motion_local[g] @ rot.T + labels.boxes_center[g, :2]
        if g in matched_of_gt:
            motion.append((gt_global, pred_global[matched_of_gt[g]]))
        else:
            motion.append(None)

    map_probs = softmax(preds.map_cls_logits, axis=-1).data
    map_pred = {"points": preds.map_points.data,
                "conf": map_probs[:, :-1].max(axis=1),
                "cls": map_probs[:, :-1].argmax(axis=1)}
    map_gt = {"points": labels.map_points, "cls": labels.map_cls}

    _, plan = select_plan(preds.plan_traj, preds.plan_logits)
    return det_pred, det_gt, motion, map_pred, map_gt, plan


def evaluate_open_loop(model, clips, cfg):
    """Run the model over each clip in streaming order and pool metrics."""
    det_frames, map_frames = [], []
    motion_samples, plan_samples, collision_samples = [], [], []
    for clip in clips:
        queue = model.make_queue()
        poses = {f.t: f.ego_pose for f in clip.frames}
        for frame in clip.frames:
            if frame.labels.plan.shape[0] != cfg.plan_horizon:
                raise ValueError("plan horizon mismatch between labels and config")
            with no_grad():
                preds, tq = model.forward(frame.images, clip.cameras,
                                          frame.canbus, queue=queue,
                                          ego_poses=poses, t0=frame.t)
            final = preds[-1]
            model.push_queue(queue, tq, final, frame.t)
            det_pred, det_gt, motion, map_pred, map_gt, plan = _frame_records(
                final, frame.labels, cfg)
            det_frames.append((det_pred, det_gt))
            map_frames.append((map_pred, map_gt))
            motion_samples.extend(motion)
            plan_samples.append((plan, frame.labels.plan))
            collision_samples.append((plan, frame.labels))

    ade, fde, miss = M.motion_metrics(motion_samples)
    report = M.MetricReport(
        detection_ap=M.detection_ap(det_frames),
        min_ade=ade, min_fde=fde, miss_rate=miss,
        map_ap=M.map_ap(map_frames),
        plan_l2=M.plan_l2(plan_samples),
        collision_rate=M.plan_collision_rate(collision_samples),
    )
    return report.validate()


def evaluate_robust(model, clips, cfg, seed=0, intensity=1.0, kinds=None):
    """Open-loop evaluation under each perturbation kind: one
    MetricReport per kind."""
    from .data import Clip
    from .perturb import KINDS, perturb

    reports = {}
    for kind in kinds or KINDS:
        perturbed = []
        for clip in clips:
            frames = []
            cameras = clip.cameras
            for frame in clip.frames:
                images, cameras = perturb(frame.images, clip.cameras, kind,
                                          seed=seed, intensity=intensity)
                f = type(frame)(frame.t, images, frame.canbus, frame.labels,
                                frame.ego_state, frame.plan)
                frames.append(f)
            perturbed.append(Clip(clip.scenario, frames, cameras))
        reports[kind] = evaluate_open_loop(model, perturbed, cfg)
    return reports


def model_planner(model, cfg):
    """Closed-loop planner callback: streams the temporal queue across
    the episode and executes the highest-confidence plan mode."""
    state = {"queue": model.make_queue(), "poses": {}}

    def plan_fn(images, canbus, ego_state, t):
        from ..geometry import RigidTransform

        state["poses"][t] = RigidTransform.from_xy_yaw(
            ego_state.x, ego_state.y, ego_state.yaw)
        cameras = plan_fn.cameras
        with no_grad():
            preds, tq = model.forward(images, cameras, canbus,
                                      queue=state["queue"],
                                      ego_poses=state["poses"], t0=t)
        model.push_queue(state["queue"], tq, preds[-1], t)
        _, plan = select_plan(preds[-1].plan_traj, preds[-1].plan_logits)
        return plan

    return plan_fn


def evaluate_closed_loop(plan_fn_factory, scenarios, cfg, cameras=None,
                         render=True):
    """Roll each scenario; score = completion x penalty per infraction."""
    completions, scores, succ = [], [], []
    colls, offs = 0, 0
    for scn in scenarios:
        plan_fn = plan_fn_factory(scn)
        if cameras is not None and hasattr(plan_fn, "__dict__"):
            plan_fn.cameras = cameras
        trace = run_episode(scn, plan_fn, cfg, cameras=cameras,
                            render=render, with_labels=False)
        score = (trace.completion
                 * COLLISION_PENALTY ** trace.collisions
                 * OFFROUTE_PENALTY ** trace.offroute_events)
        completions.append(trace.completion)
        scores.append(score)
        succ.append(trace.success)
        colls += trace.collisions
        offs += trace.offroute_events
    report = M.MetricReport(
        completion=float(np.mean(completions)) if completions else 0.0,
        collisions=float(colls),
        offroute=float(offs),
        score=float(np.mean(scores)) if scores else 0.0,
        success_rate=float(np.mean(succ)) if succ else 0.0,
    )
    return report
