"""Forward-latency and memory benchmarking across model presets."""
import time
import tracemalloc

import numpy as np

from ..config import ModelConfig
from ..geometry import RigidTransform
from ..model import DriveTransformer
from ..simworld import default_rig
from ..tokenizer import CanbusState

BENCH_FIELDS = ("preset", "layers", "hidden", "params",
                "latency_mean_s", "latency_std_s", "peak_mem_mb",
                "queue_bytes")


def bench_model(model, cameras, n_iters=10, warmup=3, with_queue=True):
    """Mean/std forward latency plus peak allocation and queue size."""
    if warmup < 3:
        raise ValueError("need at least 3 warmup iterations")
    cfg = model.cfg
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, (cfg.n_cameras, cfg.image_size,
                                   cfg.image_size, 3), dtype=np.uint8)
    canbus = CanbusState()
    queue = model.make_queue() if with_queue else None
    poses = {t: RigidTransform.identity()
             for t in range(warmup + n_iters + 1)}

    def one(t):
        from ..numerics import no_grad

        with no_grad():
            preds, tq = model.forward(images, cameras, canbus, queue=queue,
                                      ego_poses=poses, t0=t)
        if queue is not None:
            model.push_queue(queue, tq, preds[-1], t)

    for t in range(warmup):
        one(t)
    tracemalloc.start()
    times = []
    for t in range(warmup, warmup + n_iters):
        start = time.perf_counter()
        one(t)
        times.append(time.perf_counter() - start)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    return {
        "latency_mean_s": float(np.mean(times)),
        "latency_std_s": float(np.std(times)),
        "peak_mem_mb": peak / 1e6,
        "queue_bytes": queue.nbytes() if queue is not None else 0,
    }


def bench_presets(presets=("small", "base", "large"), n_iters=5, warmup=3,
                  overrides=None):
    """One CSV-ready row per preset on an identical input workload."""
    rows = []
    overrides = overrides or {}
    for name in presets:
        cfg = ModelConfig.desk(name, **overrides)
        model = DriveTransformer(cfg, seed=0)
        cameras = default_rig(cfg.image_size, n_cameras=cfg.n_cameras)
        stats = bench_model(model, cameras, n_iters=n_iters, warmup=warmup)
        rows.append({
            "preset": name, "layers": cfg.num_layers, "hidden": cfg.hidden,
            "params": model.num_parameters(), **stats,
        })
    return rows


def write_bench_csv(path, rows):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in BENCH_FIELDS})
