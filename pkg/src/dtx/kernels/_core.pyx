# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core. Mirrors dtx.kernels.ref line by line; both
backends must stay bit-identical."""
import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, fabs, floor

cnp.import_array()


def solve_assignment(cost):
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    cdef Py_ssize_t n = cost.shape[0]
    cdef Py_ssize_t m = cost.shape[1]
    if n == 0 or m == 0:
        return np.full(n, -1, dtype=np.int64)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix contains non-finite entries")
    if n > m:
        col_to_row = solve_assignment(np.ascontiguousarray(cost.T))
        out = np.full(n, -1, dtype=np.int64)
        for jj in range(m):
            if col_to_row[jj] >= 0:
                out[col_to_row[jj]] = jj
        return out

    cdef cnp.float64_t[:, ::1] c = cost
    cdef double INF = np.inf
    u_arr = np.zeros(n + 1)
    v_arr = np.zeros(m + 1)
    p_arr = np.zeros(m + 1, dtype=np.int64)
    way_arr = np.zeros(m + 1, dtype=np.int64)
    minv_arr = np.empty(m + 1)
    used_arr = np.empty(m + 1, dtype=np.uint8)
    cdef cnp.float64_t[::1] u = u_arr
    cdef cnp.float64_t[::1] v = v_arr
    cdef cnp.int64_t[::1] p = p_arr
    cdef cnp.int64_t[::1] way = way_arr
    cdef cnp.float64_t[::1] minv = minv_arr
    cdef cnp.uint8_t[::1] used = used_arr

    cdef Py_ssize_t i, j, i0, j0, j1
    cdef double delta, cur
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(m + 1):
            minv[j] = INF
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = c[i0 - 1, j - 1] - u[i0] - v[j]
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


def fill_polygon(cnp.uint8_t[:, :, ::1] img, xs_in, ys_in, color):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    xs_a = np.ascontiguousarray(xs_in, dtype=np.float64)
    ys_a = np.ascontiguousarray(ys_in, dtype=np.float64)
    cdef cnp.float64_t[::1] xs = xs_a
    cdef cnp.float64_t[::1] ys = ys_a
    cdef Py_ssize_t k = xs.shape[0]
    if k < 3:
        return
    cdef double lo = ys[0], hi = ys[0]
    cdef Py_ssize_t a, bidx, py, px, c, nc, x0i, x1i
    for a in range(1, k):
        if ys[a] < lo:
            lo = ys[a]
        if ys[a] > hi:
            hi = ys[a]
    cdef Py_ssize_t ymin = <Py_ssize_t>floor(lo)
    cdef Py_ssize_t ymax = <Py_ssize_t>ceil(hi)
    if ymin < 0:
        ymin = 0
    if ymax > h - 1:
        ymax = h - 1
    cdef cnp.uint8_t r = color[0], g = color[1], b = color[2]
    crossings_arr = np.empty(k)
    cdef cnp.float64_t[::1] crossings = crossings_arr
    cdef double yc, y0, y1, t
    for py in range(ymin, ymax + 1):
        yc = py + 0.5
        nc = 0
        for a in range(k):
            bidx = (a + 1) % k
            y0 = ys[a]
            y1 = ys[bidx]
            if (y0 <= yc) == (y1 <= yc):
                continue
            t = (yc - y0) / (y1 - y0)
            crossings[nc] = xs[a] + t * (xs[bidx] - xs[a])
            nc += 1
        crossings_arr[:nc].sort()
        for c in range(0, nc - 1, 2):
            x0i = <Py_ssize_t>ceil(crossings[c] - 0.5)
            x1i = <Py_ssize_t>floor(crossings[c + 1] - 0.5)
            if x0i < 0:
                x0i = 0
            if x1i > w - 1:
                x1i = w - 1
            for px in range(x0i, x1i + 1):
                img[py, px, 0] = r
                img[py, px, 1] = g
                img[py, px, 2] = b


def draw_polyline(cnp.uint8_t[:, :, ::1] img, xs_in, ys_in, color):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    xs_a = np.ascontiguousarray(xs_in, dtype=np.float64)
    ys_a = np.ascontiguousarray(ys_in, dtype=np.float64)
    cdef cnp.float64_t[::1] xs = xs_a
    cdef cnp.float64_t[::1] ys = ys_a
    cdef cnp.uint8_t r = color[0], g = color[1], b = color[2]
    cdef Py_ssize_t a, s, steps, px, py
    cdef double x0, y0, x1, y1, t, dx, dy
    for a in range(xs.shape[0] - 1):
        x0 = xs[a]
        y0 = ys[a]
        x1 = xs[a + 1]
        y1 = ys[a + 1]
        dx = x1 - x0
        dy = y1 - y0
        steps = <Py_ssize_t>max(fabs(dx), fabs(dy)) + 1
        for s in range(steps + 1):
            t = (<double>s) / steps
            px = <Py_ssize_t>floor(x0 + t * dx + 0.5)
            py = <Py_ssize_t>floor(y0 + t * dy + 0.5)
            if 0 <= px < w and 0 <= py < h:
                img[py, px, 0] = r
                img[py, px, 1] = g
                img[py, px, 2] = b
