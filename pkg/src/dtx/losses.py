"""Set-based training losses: Hungarian assignment, per-task terms, and
the magnitude-balanced total with deep supervision over all blocks.

Matching costs are computed on detached values; gradients flow only
through the loss terms themselves. Regression targets are normalized by
the perception range so every weighted term sits near magnitude 1.
"""
from dataclasses import dataclass

import numpy as np

from .heads import classify_mode
from .kernels import solve_assignment
from .numerics import Tensor, log_softmax, softmax

VEL_SCALE = 10.0  # m/s normalization for velocity regression


@dataclass
class Assignment:
    """Injective prediction->ground-truth pairing; unmatched predictions
    are background."""

    row_to_col: np.ndarray  # (n_pred,) int, -1 = background

    @property
    def pairs(self):
        return [(i, int(j)) for i, j in enumerate(self.row_to_col) if j >= 0]

    @property
    def n_matched(self):
        return int((self.row_to_col >= 0).sum())


def hungarian(cost):
    """Minimum-cost assignment of predictions (rows) to ground truth
    (columns); empty matrices give an empty assignment."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.size == 0:
        n = cost.shape[0] if cost.ndim == 2 else 0
        return Assignment(np.full(n, -1, dtype=np.int64))
    return Assignment(solve_assignment(cost))


def _cross_entropy(logits, targets):
    """Mean CE of integer targets under logits (N, C)."""
    n = logits.shape[0]
    ls = log_softmax(logits, axis=-1)
    picked = ls[np.arange(n), np.asarray(targets, dtype=np.int64)]
    return -picked.mean()


def _box_vector(center, size, heading, velocity, range_scale):
    """Normalized regression vector; heading enters as a sin/cos pair."""
    from .numerics import concat

    return concat([
        center / range_scale,
        size / range_scale,
        heading,
        velocity / VEL_SCALE,
    ], axis=1)


def _gt_box_vector(labels, range_scale):
    heading = np.stack([np.sin(labels.boxes_yaw), np.cos(labels.boxes_yaw)], axis=1)
    return np.concatenate([
        labels.boxes_center / range_scale,
        labels.boxes_size / range_scale,
        heading,
        labels.boxes_velocity / VEL_SCALE,
    ], axis=1)


def detection_loss(boxes, labels, weights, range_scale, n_classes):
    """DETR-style matched loss: class CE over all queries (background for
    unmatched) plus L1 on matched box vectors. Returns (loss, Assignment)."""
    n = boxes.cls_logits.shape[0]
    g = labels.n_agents
    bg = n_classes  # background index

    pred_vec = _box_vector(boxes.center, boxes.size, boxes.heading,
                           boxes.velocity, range_scale)
    if g == 0:
        targets = np.full(n, bg, dtype=np.int64)
        return weights.cls_weight * _cross_entropy(boxes.cls_logits, targets), \
            Assignment(np.full(n, -1, dtype=np.int64))

    gt_vec = _gt_box_vector(labels, range_scale)
    probs = softmax(boxes.cls_logits, axis=-1).data
    cls_cost = 1.0 - probs[:, labels.boxes_cls]                    # (n, g)
    reg_cost = np.abs(pred_vec.data[:, None, :] - gt_vec[None, :, :]).mean(axis=2)
    assignment = hungarian(weights.cls_weight * cls_cost + weights.reg_weight * reg_cost)

    targets = np.full(n, bg, dtype=np.int64)
    matched = assignment.row_to_col >= 0
    targets[matched] = labels.boxes_cls[assignment.row_to_col[matched]]
    loss = weights.cls_weight * _cross_entropy(boxes.cls_logits, targets)
    if matched.any():
        rows = np.nonzero(matched)[0]
        cols = assignment.row_to_col[rows]
        diff = pred_vec[rows] - Tensor(gt_vec[cols])
        loss = loss + weights.reg_weight * diff.abs().mean()
    return loss, assignment


def motion_wta_loss(motion_traj, motion_logits, labels, assignment, weights,
                    range_scale):
    """Winner-take-all motion loss on matched agents; labels live in each
    agent's local frame, so this term never sees detection outputs."""
    matched = [(i, j) for i, j in assignment.pairs]
    if not matched or labels.motion_local.size == 0:
        return Tensor(0.0)
    reg_terms = []
    rows, winners = [], []
    for i, j in matched:
        gt = labels.motion_local[j]  # (H, 2)
        finals = motion_traj.data[i, :, -1, :]  # (M, 2) detached winner pick
        winner = int(np.argmin(np.linalg.norm(finals - gt[-1], axis=1)))
        diff = motion_traj[i, winner] - Tensor(gt)
        reg_terms.append((diff / range_scale).abs().mean())
        rows.append(i)
        winners.append(winner)
    from .numerics import stack

    reg = stack(reg_terms).mean()
    ce = _cross_entropy(motion_logits[np.array(rows)], np.array(winners))
    return weights.reg_weight * reg + weights.cls_weight * ce


def map_loss(map_points, map_cls_logits, labels, weights, range_scale, n_classes):
    """Polyline matching loss; the point-L1 term takes the cheaper of the
    forward and reversed point orders (direction invariance)."""
    n = map_cls_logits.shape[0]
    g = labels.n_map
    bg = n_classes

    if g == 0:
        targets = np.full(n, bg, dtype=np.int64)
        return weights.cls_weight * _cross_entropy(map_cls_logits, targets)

    probs = softmax(map_cls_logits, axis=-1).data
    cls_cost = 1.0 - probs[:, labels.map_cls]
    pred = map_points.data / range_scale           # (n, P, 2)
    gt_f = labels.map_points / range_scale         # (g, P, 2)
    gt_r = gt_f[:, ::-1, :]
    d_f = np.abs(pred[:, None] - gt_f[None]).mean(axis=(2, 3))
    d_r = np.abs(pred[:, None] - gt_r[None]).mean(axis=(2, 3))
    reg_cost = np.minimum(d_f, d_r)
    assignment = hungarian(weights.cls_weight * cls_cost + weights.reg_weight * reg_cost)

    targets = np.full(n, bg, dtype=np.int64)
    matched = assignment.row_to_col >= 0
    targets[matched] = labels.map_cls[assignment.row_to_col[matched]]
    loss = weights.cls_weight * _cross_entropy(map_cls_logits, targets)
    if matched.any():
        reg_terms = []
        for i in np.nonzero(matched)[0]:
            j = int(assignment.row_to_col[i])
            gt = gt_f[j] if d_f[i, j] <= d_r[i, j] else gt_r[j]
            reg_terms.append((map_points[i] / range_scale - Tensor(gt)).abs().mean())
        from .numerics import stack

        loss = loss + weights.reg_weight * stack(reg_terms).mean()
    return loss


def planning_loss(plan_traj, plan_logits, labels, weights, range_scale,
                  stop_path_len=0.5, straight_max_deg=15.0, turn_max_deg=60.0):
    """Winner-take-all over the six plan modes: only the ground-truth
    mode's trajectory receives regression gradient."""
    gt_mode = classify_mode(labels.plan, stop_path_len, straight_max_deg,
                            turn_max_deg)
    reg = ((plan_traj[gt_mode] - Tensor(labels.plan)) / range_scale).abs().mean()
    ce = _cross_entropy(plan_logits.reshape(1, -1), np.array([gt_mode]))
    return weights.reg_weight * reg + weights.cls_weight * ce


def frame_loss(preds, labels, weights, cfg):
    """All four task losses for one layer's predictions."""
    det, assignment = detection_loss(preds.boxes, labels, weights,
                                     cfg.range_xy, cfg.n_agent_classes)
    motion = motion_wta_loss(preds.motion_traj, preds.motion_logits, labels,
                             assignment, weights, cfg.range_xy)
    mapping = map_loss(preds.map_points, preds.map_cls_logits, labels,
                       weights, cfg.range_xy, cfg.n_map_classes)
    planning = planning_loss(preds.plan_traj, preds.plan_logits, labels,
                             weights, cfg.range_xy, cfg.stop_path_len,
                             cfg.straight_max_deg, cfg.turn_max_deg)
    return det, motion, mapping, planning


def total_loss(per_layer_preds, labels, weights, cfg):
    """Deep-supervised weighted sum, averaged over layers.

    Returns (scalar Tensor, per-term float dict for logging).
    """
    if not per_layer_preds:
        raise ValueError("need at least one layer of predictions")
    total = Tensor(0.0)
    terms = {"detection": 0.0, "motion": 0.0, "mapping": 0.0, "planning": 0.0}
    for preds in per_layer_preds:
        det, motion, mapping, planning = frame_loss(preds, labels, weights, cfg)
        total = total + (weights.w_detection * det + weights.w_motion * motion
                         + weights.w_mapping * mapping + weights.w_planning * planning)
        terms["detection"] += float(det.data)
        terms["motion"] += float(motion.data)
        terms["mapping"] += float(mapping.data)
        terms["planning"] += float(planning.data)
    n = len(per_layer_preds)
    total = total / float(n)
    for k in terms:
        terms[k] /= n
    terms["total"] = float(total.data)
    return total, terms
