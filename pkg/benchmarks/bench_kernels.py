"""Compare the compiled kernel backend against the pure-Python reference.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--iters N] [--seed S]

Prints per-kernel wall time for both backends plus the speedup, and
verifies that outputs stay bit-identical on every benchmarked input.
"""
import argparse
import time

import numpy as np

from dtx.kernels import BACKEND, ref
from dtx.kernels import solve_assignment, fill_polygon, draw_polyline


def timed(fn, args_list, iters):
    best = np.inf
    for _ in range(iters):
        start = time.perf_counter()
        out = [fn(*args) for args in args_list]
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_assignment(rng, iters):
    cases = [(rng.random((n, n)) * 10.0,) for n in (5, 10, 20, 40)
             for _ in range(20)]
    t_sel, out_sel = timed(solve_assignment, cases, iters)
    t_ref, out_ref = timed(ref.solve_assignment, cases, iters)
    for a, b in zip(out_sel, out_ref):
        assert np.array_equal(a, b), "assignment backends disagree"
    return "solve_assignment", t_sel, t_ref


def raster_cases(rng, n=50):
    cases = []
    for _ in range(n):
        img = np.zeros((96, 96, 3), dtype=np.uint8)
        k = int(rng.integers(3, 8))
        xs = rng.uniform(-10, 106, k)
        ys = rng.uniform(-10, 106, k)
        color = rng.integers(0, 256, 3).astype(np.uint8)
        cases.append((img, xs, ys, color))
    return cases


def bench_raster(fn_name, rng, iters):
    sel = getattr(__import__("dtx.kernels", fromlist=[fn_name]), fn_name)
    pure = getattr(ref, fn_name)
    cases = raster_cases(rng)

    def run(fn):
        outs = []
        start = time.perf_counter()
        for img, xs, ys, color in cases:
            buf = img.copy()
            fn(buf, xs, ys, color)
            outs.append(buf)
        return time.perf_counter() - start, outs

    t_sel = np.inf
    t_ref = np.inf
    for _ in range(iters):
        t, out_sel = run(sel)
        t_sel = min(t_sel, t)
        t, out_ref = run(pure)
        t_ref = min(t_ref, t)
    for a, b in zip(out_sel, out_ref):
        assert np.array_equal(a, b), f"{fn_name} backends disagree"
    return fn_name, t_sel, t_ref


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=5,
                        help="repetitions; best time is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"selected backend: {BACKEND}")
    if BACKEND != "compiled":
        print("note: compiled core unavailable or DTX_PURE=1; "
              "both columns run the pure-Python reference")
    rows = [bench_assignment(rng, args.iters),
            bench_raster("fill_polygon", rng, args.iters),
            bench_raster("draw_polyline", rng, args.iters)]
    print(f"{'kernel':<18}{'selected (ms)':>14}{'pure (ms)':>12}{'speedup':>9}")
    for name, t_sel, t_ref in rows:
        speed = t_ref / t_sel if t_sel > 0 else float("inf")
        print(f"{name:<18}{t_sel * 1e3:>14.2f}{t_ref * 1e3:>12.2f}{speed:>9.2f}x")
    print("outputs bit-identical across backends: OK")


if __name__ == "__main__":
    main()
