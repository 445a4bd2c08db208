"""Pure-Python/NumPy reference kernels.

These are the fallback implementations of the hot loops (assignment solver
and rasterizer primitives). The compiled module dtx.kernels._core mirrors
them line by line so that both backends produce bit-identical results.
"""
import numpy as np


def solve_assignment(cost):
    """Minimum-cost bipartite assignment (augmenting-path / dual potentials).

    cost: (n, m) float64 matrix. Returns an int64 array `row_to_col` of
    length n with -1 for unassigned rows; exactly min(n, m) rows are
    assigned, and the total cost of the assignment is minimal.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    n, m = cost.shape
    if n == 0 or m == 0:
        return np.full(n, -1, dtype=np.int64)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix contains non-finite entries")
    if n > m:
        col_to_row = solve_assignment(cost.T)
        row_to_col = np.full(n, -1, dtype=np.int64)
        for j, i in enumerate(col_to_row):
            if i >= 0:
                row_to_col[i] = j
        return row_to_col

    INF = np.inf
    # dual potentials, 1-indexed; p[j] = row matched to column j (0 = free)
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)
    way = np.zeros(m + 1, dtype=np.int64)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, INF)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    row_to_col = np.full(n, -1, dtype=np.int64)
    for j in range(1, m + 1):
        if p[j] > 0:
            row_to_col[p[j] - 1] = j - 1
    return row_to_col


def fill_polygon(img, xs, ys, color):
    """Even-odd scanline fill of a polygon into an (H, W, 3) uint8 image.

    Vertices (xs, ys) are float pixel coordinates; pixels whose centers
    fall inside the polygon are painted.
    """
    h, w = img.shape[0], img.shape[1]
    k = len(xs)
    if k < 3:
        return
    ymin = max(int(np.floor(min(ys))), 0)
    ymax = min(int(np.ceil(max(ys))), h - 1)
    r, g, b = color
    for py in range(ymin, ymax + 1):
        yc = py + 0.5
        crossings = []
        for a in range(k):
            bidx = (a + 1) % k
            y0, y1 = ys[a], ys[bidx]
            if (y0 <= yc) == (y1 <= yc):
                continue
            t = (yc - y0) / (y1 - y0)
            crossings.append(xs[a] + t * (xs[bidx] - xs[a]))
        crossings.sort()
        for c in range(0, len(crossings) - 1, 2):
            x0 = int(np.ceil(crossings[c] - 0.5))
            x1 = int(np.floor(crossings[c + 1] - 0.5))
            if x0 < 0:
                x0 = 0
            if x1 > w - 1:
                x1 = w - 1
            for px in range(x0, x1 + 1):
                img[py, px, 0] = r
                img[py, px, 1] = g
                img[py, px, 2] = b


def draw_polyline(img, xs, ys, color):
    """1-px polyline rasterization (integer DDA) into an (H, W, 3) image."""
    h, w = img.shape[0], img.shape[1]
    r, g, b = color
    for a in range(len(xs) - 1):
        x0, y0 = xs[a], ys[a]
        x1, y1 = xs[a + 1], ys[a + 1]
        steps = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
        for s in range(steps + 1):
            t = s / steps
            px = int(np.floor(x0 + t * (x1 - x0) + 0.5))
            py = int(np.floor(y0 + t * (y1 - y0) + 0.5))
            if 0 <= px < w and 0 <= py < h:
                img[py, px, 0] = r
                img[py, px, 1] = g
                img[py, px, 2] = b
