"""Single-stage training loop: deep-supervised loss on every frame, one
optimizer step per frame, temporal queues fed clip-sequentially."""
import csv

import numpy as np

from ..losses import total_loss
from ..numerics import AdamW, cosine_lr
from ..numerics.tensor import NonFiniteError

CSV_FIELDS = ("step", "L_det", "L_motion", "L_map", "L_plan", "total")


class NanLossError(RuntimeError):
    """Raised when a training step produces a non-finite loss."""

    def __init__(self, step, detail):
        super().__init__(f"non-finite loss at step {step}: {detail}")
        self.step = step
        self.detail = detail


def _clip_pose_table(clip):
    return {f.t: f.ego_pose for f in clip.frames}


def _frame_stream(clips):
    """Endless clip-sequential stream of (clip id, pose table, frame,
    is_first_frame_of_clip)."""
    while True:
        for ci, clip in enumerate(clips):
            poses = _clip_pose_table(clip)
            for fi, frame in enumerate(clip.frames):
                yield ci, clip, poses, frame, fi == 0


def train(model, clips, tcfg, weights, steps=None, csv_path=None,
          on_step=None):
    """Optimize the model on clip frames; returns the per-step history.

    History rows carry the per-task loss values logged to the CSV. A
    non-finite loss aborts with a NanLossError diagnostic.
    """
    if not clips or all(len(c) == 0 for c in clips):
        raise ValueError("training needs a nonempty dataset")
    steps = tcfg.steps if steps is None else steps
    model.cfg.dropout = tcfg.dropout
    opt = AdamW(model.parameters(), lr=tcfg.lr, weight_decay=tcfg.weight_decay)
    rng = np.random.default_rng(tcfg.seed)
    stream = _frame_stream(clips)
    queue = None
    history = []

    writer = fh = None
    if csv_path is not None:
        fh = open(csv_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)

    try:
        for step in range(steps):
            ci, clip, poses, frame, clip_start = next(stream)
            if clip_start:
                queue = model.make_queue()
            try:
                preds, tq = model.forward(
                    frame.images, clip.cameras, frame.canbus, queue=queue,
                    ego_poses=poses, t0=frame.t, train=True, rng=rng)
                loss, terms = total_loss(preds, frame.labels, weights, model.cfg)
            except NonFiniteError as exc:
                raise NanLossError(step, str(exc)) from exc
            if not np.isfinite(loss.data):
                raise NanLossError(step, f"terms={terms}")
            opt.zero_grad()
            loss.backward()
            lr = (cosine_lr(step, steps, tcfg.lr)
                  if tcfg.schedule == "cosine" else tcfg.lr)
            opt.step(lr=lr)
            model.push_queue(queue, tq, preds[-1], frame.t)

            row = {"step": step, "L_det": terms["detection"],
                   "L_motion": terms["motion"], "L_map": terms["mapping"],
                   "L_plan": terms["planning"], "total": terms["total"]}
            history.append(row)
            if writer is not None:
                writer.writerow([row[k] for k in CSV_FIELDS])
            if on_step is not None:
                on_step(row)
    finally:
        if fh is not None:
            fh.close()
    return history, opt
