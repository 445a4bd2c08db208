"""Training, evaluation, robustness, and benchmarking harness."""
from .bench import BENCH_FIELDS, bench_model, bench_presets, write_bench_csv
from .checkpoint import (CheckpointError, load_checkpoint,
                         load_optimizer_state, restore_model, save_checkpoint)
from .data import Clip, flatten_frames, generate_clips, rollout_clip, subsample_clips
from .evaluate import (evaluate_closed_loop, evaluate_open_loop,
                       evaluate_robust, model_planner)
from .metrics import (AP_THRESHOLDS, MetricReport, chamfer, detection_ap,
                      map_ap, motion_metrics, plan_collision_rate, plan_l2)
from .perturb import KINDS, perturb
from .train import CSV_FIELDS, NanLossError, train

__all__ = [
    "AP_THRESHOLDS", "BENCH_FIELDS", "CSV_FIELDS", "CheckpointError", "Clip",
    "KINDS", "MetricReport", "NanLossError", "bench_model", "bench_presets",
    "chamfer", "detection_ap", "evaluate_closed_loop", "evaluate_open_loop",
    "evaluate_robust", "flatten_frames", "generate_clips", "load_checkpoint",
    "load_optimizer_state", "map_ap", "model_planner", "motion_metrics",
    "perturb", "plan_collision_rate", "plan_l2", "restore_model",
    "rollout_clip", "save_checkpoint", "subsample_clips", "train",
    "write_bench_csv",
]
