"""Kernel backends: assignment solver and rasterizer primitives.

The compiled backend must be bit-identical to the pure reference; the
solver is validated against brute-force enumeration.
"""
import itertools

import numpy as np
import pytest

from dtx import kernels
from dtx.kernels import ref


def brute_force_assignment(cost):
    """Enumerate all injective row->column maps; return the minimal cost."""
    n, m = cost.shape
    best = np.inf
    k = min(n, m)
    for rows in itertools.combinations(range(n), k):
        for cols in itertools.permutations(range(m), k):
            total = sum(cost[i, j] for i, j in zip(rows, cols))
            if total < best:
                best = total
    return best


def assignment_cost(cost, row_to_col):
    return sum(cost[i, j] for i, j in enumerate(row_to_col) if j >= 0)


# -- solver oracle ----------------------------------------------------------

def test_single_entry():
    assert ref.solve_assignment(np.array([[3.5]])).tolist() == [0]


def test_diagonal_preference():
    cost = np.array([[1.0, 10.0, 10.0],
                     [10.0, 1.0, 10.0],
                     [10.0, 10.0, 1.0]])
    assert ref.solve_assignment(cost).tolist() == [0, 1, 2]


def test_rectangular_wide_matches_enumeration():
    rng = np.random.default_rng(7)
    cost = rng.uniform(0, 10, (5, 7))
    sol = ref.solve_assignment(cost)
    assert (sol >= 0).sum() == 5
    assert assignment_cost(cost, sol) == pytest.approx(
        brute_force_assignment(cost), abs=1e-12)


def test_rectangular_tall_matches_enumeration():
    rng = np.random.default_rng(9)
    cost = rng.uniform(0, 10, (6, 4))
    sol = ref.solve_assignment(cost)
    assert (sol >= 0).sum() == 4  # only min(n, m) rows assigned
    assert assignment_cost(cost, sol) == pytest.approx(
        brute_force_assignment(cost), abs=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_random_square_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    cost = rng.normal(size=(n, n))
    sol = ref.solve_assignment(cost)
    assert sorted(sol.tolist()) == sorted(set(sol.tolist()))  # injective
    assert assignment_cost(cost, sol) == pytest.approx(
        brute_force_assignment(cost), abs=1e-10)


def test_empty_and_errors():
    assert ref.solve_assignment(np.zeros((0, 3))).size == 0
    with pytest.raises(ValueError):
        ref.solve_assignment(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        ref.solve_assignment(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        ref.solve_assignment(np.array([[np.inf, 1.0]]))


# -- rasterizer primitives --------------------------------------------------

def test_polyline_paints_endpoints_and_clips():
    img = np.zeros((8, 8, 3), dtype=np.uint8)
    ref.draw_polyline(img, [1.0, 6.0], [2.0, 2.0], (255, 0, 0))
    assert img[2, 1, 0] == 255 and img[2, 6, 0] == 255
    assert img[2, 1:7, 0].min() == 255  # contiguous horizontal run
    # out-of-bounds segments must not raise or wrap
    ref.draw_polyline(img, [-5.0, 20.0], [-5.0, 20.0], (0, 255, 0))


def test_fill_polygon_square():
    img = np.zeros((10, 10, 3), dtype=np.uint8)
    ref.fill_polygon(img, [2.0, 7.0, 7.0, 2.0], [2.0, 2.0, 7.0, 7.0], (0, 0, 9))
    filled = np.argwhere(img[:, :, 2] == 9)
    # pixel centers strictly inside [2, 7] x [2, 7]
    assert filled[:, 0].min() == 2 and filled[:, 0].max() == 6
    assert filled[:, 1].min() == 2 and filled[:, 1].max() == 6


def test_fill_polygon_degenerate_is_noop():
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    ref.fill_polygon(img, [1.0, 2.0], [1.0, 2.0], (5, 5, 5))
    assert img.sum() == 0


# -- backend parity ---------------------------------------------------------

needs_compiled = pytest.mark.skipif(
    kernels.BACKEND != "compiled", reason="compiled backend unavailable")


@needs_compiled
def test_backends_bit_identical_assignment():
    from dtx.kernels import _core

    rng = np.random.default_rng(123)
    for _ in range(50):
        n = int(rng.integers(1, 8))
        m = int(rng.integers(1, 8))
        cost = rng.normal(size=(n, m)) * 10
        assert np.array_equal(_core.solve_assignment(cost),
                              ref.solve_assignment(cost))


@needs_compiled
def test_backends_bit_identical_raster():
    from dtx.kernels import _core

    rng = np.random.default_rng(5)
    for _ in range(20):
        a = np.zeros((24, 24, 3), dtype=np.uint8)
        b = np.zeros((24, 24, 3), dtype=np.uint8)
        xs = rng.uniform(-4, 28, 5)
        ys = rng.uniform(-4, 28, 5)
        _core.draw_polyline(a, xs, ys, (10, 20, 30))
        ref.draw_polyline(b, xs, ys, (10, 20, 30))
        assert np.array_equal(a, b)
        _core.fill_polygon(a, xs[:4], ys[:4], (7, 8, 9))
        ref.fill_polygon(b, xs[:4], ys[:4], (7, 8, 9))
        assert np.array_equal(a, b)
