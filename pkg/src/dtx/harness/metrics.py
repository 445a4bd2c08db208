"""Pure metric computations over per-frame prediction/label records.

Evaluation matching is greedy by center distance (confidence order),
independent of the Hungarian matcher used in training. Feeding the
labels back in as predictions achieves every metric's ideal value
exactly.
"""
from dataclasses import dataclass, field

import numpy as np

from ..simworld import EGO_SIZE, rect_overlap

AP_THRESHOLDS = (0.5, 1.0, 2.0, 4.0)
MAP_CHAMFER_THRESHOLD = 1.0
MOTION_MATCH_RADIUS = 2.0


@dataclass
class MetricReport:
    detection_ap: dict = field(default_factory=dict)  # threshold -> AP
    min_ade: float = 0.0
    min_fde: float = 0.0
    miss_rate: float = 0.0
    map_ap: float = 0.0
    plan_l2: float = 0.0
    collision_rate: float = 0.0
    completion: float = 0.0
    collisions: float = 0.0
    offroute: float = 0.0
    score: float = 0.0
    success_rate: float = 0.0

    def to_dict(self):
        out = {f"ap@{th:g}m": v for th, v in sorted(self.detection_ap.items())}
        out.update({
            "min_ade": self.min_ade, "min_fde": self.min_fde,
            "miss_rate": self.miss_rate, "map_ap": self.map_ap,
            "plan_l2": self.plan_l2, "collision_rate": self.collision_rate,
            "completion": self.completion, "collisions": self.collisions,
            "offroute": self.offroute, "score": self.score,
            "success_rate": self.success_rate,
        })
        return out

    def validate(self):
        for th, v in self.detection_ap.items():
            assert 0.0 <= v <= 1.0, (th, v)
        for rate in (self.miss_rate, self.map_ap, self.collision_rate,
                     self.completion, self.success_rate):
            assert 0.0 <= rate <= 1.0
        for dist in (self.min_ade, self.min_fde, self.plan_l2):
            assert dist >= 0.0
        return self


def _greedy_match(pred_xy, pred_conf, gt_xy, radius):
    """Confidence-ordered nearest-unmatched-GT matching; returns the
    per-prediction matched GT index (-1 = false positive)."""
    match = np.full(len(pred_xy), -1, dtype=np.int64)
    taken = np.zeros(len(gt_xy), dtype=bool)
    order = np.argsort(-np.asarray(pred_conf), kind="stable")
    for i in order:
        if len(gt_xy) == 0:
            break
        d = np.linalg.norm(np.asarray(gt_xy) - np.asarray(pred_xy)[i], axis=1)
        d[taken] = np.inf
        j = int(np.argmin(d))
        if d[j] <= radius:
            match[i] = j
            taken[j] = True
    return match


def _average_precision(confs, tps, n_gt):
    """All-point interpolated AP from pooled confidence-ranked flags."""
    if n_gt == 0:
        return 0.0
    if len(confs) == 0:
        return 0.0
    order = np.argsort(-np.asarray(confs), kind="stable")
    tp = np.asarray(tps, dtype=np.float64)[order]
    fp = 1.0 - tp
    ctp = np.cumsum(tp)
    cfp = np.cumsum(fp)
    recall = ctp / n_gt
    precision = ctp / np.maximum(ctp + cfp, 1e-12)
    # precision envelope, summed over recall increments
    ap = 0.0
    best = 0.0
    for i in range(len(recall) - 1, -1, -1):
        best = max(best, precision[i])
        r_lo = recall[i - 1] if i > 0 else 0.0
        ap += best * (recall[i] - r_lo)
    return float(min(max(ap, 0.0), 1.0))


def detection_ap(frames, thresholds=AP_THRESHOLDS):
    """frames: list of (pred dict, gt dict); pred has centers (N, 2),
    conf (N,), cls (N,); gt has centers (G, 2), cls (G,)."""
    out = {}
    for th in thresholds:
        confs, tps = [], []
        n_gt = 0
        for pred, gt in frames:
            p_xy = np.asarray(pred["centers"], dtype=np.float64).reshape(-1, 2)
            g_xy = np.asarray(gt["centers"], dtype=np.float64).reshape(-1, 2)
            p_cls = np.asarray(pred["cls"], dtype=np.int64)
            g_cls = np.asarray(gt["cls"], dtype=np.int64)
            conf = np.asarray(pred["conf"], dtype=np.float64)
            n_gt += len(g_xy)
            for cls in np.unique(np.concatenate([p_cls, g_cls])) if len(p_cls) + len(g_cls) else []:
                pi = np.nonzero(p_cls == cls)[0]
                gi = np.nonzero(g_cls == cls)[0]
                match = _greedy_match(p_xy[pi], conf[pi], g_xy[gi], th)
                confs.extend(conf[pi].tolist())
                tps.extend((match >= 0).tolist())
        out[th] = _average_precision(confs, tps, n_gt)
    return out


def motion_metrics(samples):
    """samples: list of (gt future (H, 2), predicted modes (M, H, 2)),
    both in the same frame; plus None entries for unmatched GT agents."""
    ades, fdes = [], []
    misses = 0
    total = 0
    for item in samples:
        total += 1
        if item is None:
            misses += 1
            continue
        gt, modes = item
        gt = np.asarray(gt, dtype=np.float64)
        modes = np.asarray(modes, dtype=np.float64)
        d = np.linalg.norm(modes - gt[None], axis=2)  # (M, H)
        ade = float(d.mean(axis=1).min())
        fde = float(d[:, -1].min())
        ades.append(ade)
        fdes.append(fde)
        if fde > MOTION_MATCH_RADIUS:
            misses += 1
    if not ades:
        return 0.0, 0.0, (misses / total if total else 0.0)
    return float(np.mean(ades)), float(np.mean(fdes)), misses / total


def chamfer(a, b):
    """Symmetric mean nearest-point distance between two point sets."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    d = np.linalg.norm(a[:, None] - b[None], axis=2)
    return 0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean())


def map_ap(frames, threshold=MAP_CHAMFER_THRESHOLD):
    """Chamfer-matched AP over map instances; frames: list of
    (pred dict(points, cls, conf), gt dict(points, cls))."""
    confs, tps = [], []
    n_gt = 0
    for pred, gt in frames:
        p_pts = np.asarray(pred["points"], dtype=np.float64)
        g_pts = np.asarray(gt["points"], dtype=np.float64)
        p_cls = np.asarray(pred["cls"], dtype=np.int64)
        g_cls = np.asarray(gt["cls"], dtype=np.int64)
        conf = np.asarray(pred["conf"], dtype=np.float64)
        n_gt += len(g_pts)
        taken = np.zeros(len(g_pts), dtype=bool)
        for i in np.argsort(-conf, kind="stable"):
            hit = False
            if len(g_pts):
                dists = np.array([
                    chamfer(p_pts[i], g_pts[j]) if (not taken[j] and g_cls[j] == p_cls[i])
                    else np.inf
                    for j in range(len(g_pts))
                ])
                j = int(np.argmin(dists))
                if dists[j] <= threshold:
                    taken[j] = True
                    hit = True
            confs.append(conf[i])
            tps.append(hit)
    return _average_precision(confs, tps, n_gt)


def plan_l2(samples):
    """Mean waypoint L2 between selected plans and expert plans."""
    if not samples:
        return 0.0
    vals = [float(np.linalg.norm(np.asarray(p) - np.asarray(g), axis=1).mean())
            for p, g in samples]
    return float(np.mean(vals))


def plan_collision_rate(samples, plan_dt=0.5, frame_period=0.1):
    """Fraction of frames whose planned ego positions overlap any agent's
    labeled future box (constant-yaw extrapolation of GT motion)."""
    if not samples:
        return 0.0
    hits = 0
    for plan, labels in samples:
        plan = np.asarray(plan, dtype=np.float64)
        collided = False
        pts = np.vstack([[0.0, 0.0], plan])
        for h in range(1, len(pts)):
            seg = pts[h] - pts[h - 1]
            yaw = np.arctan2(seg[1], seg[0]) if np.linalg.norm(seg) > 1e-6 else 0.0
            for g in range(labels.n_agents):
                fut = labels.motion_local[g, h - 1] if h - 1 < labels.motion_local.shape[1] else labels.motion_local[g, -1]
                ca, sa = np.cos(labels.boxes_yaw[g]), np.sin(labels.boxes_yaw[g])
                pos = labels.boxes_center[g, :2] + np.array(
                    [ca * fut[0] - sa * fut[1], sa * fut[0] + ca * fut[1]])
                if rect_overlap(pts[h], yaw, EGO_SIZE[:2], pos,
                                labels.boxes_yaw[g], labels.boxes_size[g, :2]):
                    collided = True
                    break
            if collided:
                break
        hits += collided
    return hits / len(samples)
