"""Rigid transforms, pinhole rays, and sinusoidal encodings vs hand
oracles."""
import numpy as np
import pytest

from dtx.geometry import (CameraModel, DepthBins, GeometryError,
                          RigidTransform, apply, compose, ray_points,
                          sincos_encode, sincos_encode_rows, unproject)


def make_cam(k=None, extrinsics=None, width=4, height=4):
    if k is None:
        k = np.eye(3)
    if extrinsics is None:
        extrinsics = RigidTransform.identity()
    return CameraModel(k, extrinsics, width, height)


# -- rigid transforms -------------------------------------------------------

def test_identity_apply():
    t = RigidTransform.identity()
    p = np.array([1.0, 2.0, 3.0])
    assert np.allclose(apply(t, p), p, atol=1e-15)


def test_rotation_oracle():
    t = RigidTransform.from_xy_yaw(1.0, 2.0, np.pi / 2)
    # yaw +90 deg maps +x to +y, then translate
    assert np.allclose(apply(t, [1.0, 0.0, 0.0]), [1.0, 3.0, 0.0], atol=1e-12)


def test_inverse_composes_to_identity(rng):
    for _ in range(10):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        ang = rng.uniform(-np.pi, np.pi)
        k = np.array([[0, -axis[2], axis[1]],
                      [axis[2], 0, -axis[0]],
                      [-axis[1], axis[0], 0]])
        r = np.eye(3) + np.sin(ang) * k + (1 - np.cos(ang)) * (k @ k)
        t = RigidTransform.from_rotation_translation(r, rng.normal(size=3))
        assert np.max(np.abs(compose(t, t.inverse()).mat - np.eye(4))) < 1e-10


def test_compose_associative(rng):
    ts = [RigidTransform.from_xy_yaw(*rng.normal(size=3)) for _ in range(3)]
    left = compose(compose(ts[0], ts[1]), ts[2])
    right = compose(ts[0], compose(ts[1], ts[2]))
    assert np.max(np.abs(left.mat - right.mat)) < 1e-9


def test_compose_order():
    a = RigidTransform.from_xy_yaw(1.0, 0.0, 0.0)
    b = RigidTransform.from_xy_yaw(0.0, 0.0, np.pi / 2)
    # compose(a, b) applies b first
    assert np.allclose(apply(compose(a, b), [1.0, 0.0, 0.0]),
                       [1.0, 1.0, 0.0], atol=1e-12)


def test_reflection_rejected():
    m = np.eye(4)
    m[0, 0] = -1.0  # determinant -1
    with pytest.raises(GeometryError):
        RigidTransform(m)


def test_bad_shapes_rejected():
    with pytest.raises(GeometryError):
        RigidTransform(np.eye(3))
    m = np.eye(4)
    m[3, 0] = 0.5
    with pytest.raises(GeometryError):
        RigidTransform(m)


def test_near_rotation_is_orthonormalized():
    m = np.eye(4)
    m[:3, :3] = np.eye(3) + 1e-9 * np.ones((3, 3))
    t = RigidTransform(m)
    r = t.rotation
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)


# -- pinhole rays -----------------------------------------------------------

def test_unproject_hand_oracle():
    # focal 2, principal point (1, 1): pixel (3, 1) at depth 2 lifts to
    # camera-frame (2, 0, 2)
    k = np.array([[2.0, 0.0, 1.0], [0.0, 2.0, 1.0], [0.0, 0.0, 1.0]])
    p = unproject(make_cam(k), (3.0, 1.0), 2.0)
    assert np.max(np.abs(p - [2.0, 0.0, 2.0])) < 1e-9


def test_identity_intrinsics_rays():
    cam = make_cam(width=2, height=2)
    bins = DepthBins(k_depth=2, d_min=1.0, d_max=2.0)
    pts = ray_points(cam, (0.0, 0.0), bins)
    assert np.max(np.abs(pts - [[0, 0, 1], [0, 0, 2]])) < 1e-9


def test_ray_points_apply_extrinsics():
    ext = RigidTransform.from_xy_yaw(5.0, 0.0, 0.0)
    cam = make_cam(extrinsics=ext, width=2, height=2)
    pts = ray_points(cam, (0.0, 0.0), DepthBins(k_depth=2, d_min=1.0, d_max=2.0))
    assert np.allclose(pts, [[5, 0, 1], [5, 0, 2]], atol=1e-9)


def test_ray_points_equal_spacing():
    cam = make_cam(width=8, height=8)
    pts = ray_points(cam, (4.0, 4.0), DepthBins(k_depth=5, d_min=1.0, d_max=9.0))
    gaps = np.diff(pts, axis=0)
    assert np.max(np.abs(gaps - gaps[0])) < 1e-9
    assert np.all(np.diff(pts[:, 2]) > 0)  # increasing depth


def test_ray_points_out_of_bounds_pixel():
    with pytest.raises(GeometryError):
        ray_points(make_cam(), (10.0, 0.0), DepthBins())


def test_depth_bins_validation():
    with pytest.raises(GeometryError):
        DepthBins(k_depth=0)
    with pytest.raises(GeometryError):
        DepthBins(d_min=5.0, d_max=1.0)
    assert DepthBins(k_depth=1, d_min=2.0, d_max=4.0).depths().tolist() == [2.0]


def test_singular_intrinsics_rejected():
    with pytest.raises(GeometryError):
        make_cam(k=np.zeros((3, 3)))


def test_fov_intrinsics():
    cam = CameraModel.from_fov(90.0, 8, 8, RigidTransform.identity())
    assert cam.intrinsics[0, 0] == pytest.approx(4.0)  # tan(45) = 1
    assert cam.intrinsics[0, 2] == 4.0


# -- sinusoidal encoding ----------------------------------------------------

def test_sincos_zero_pattern():
    out = sincos_encode([0.0], num_freqs=3)
    assert np.array_equal(out, [0.0, 1.0, 0.0, 1.0, 0.0, 1.0])


def test_sincos_half_pi_single_freq():
    out = sincos_encode([np.pi / 2], num_freqs=1)
    assert out[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(out[1]) < 1e-12


def test_sincos_geometric_frequencies():
    x = 0.3
    out = sincos_encode([x], num_freqs=3)
    expect = []
    for f in (1.0, 2.0, 4.0):
        expect += [np.sin(f * x), np.cos(f * x)]
    assert np.allclose(out, expect, atol=1e-12)


def test_sincos_bounded_and_sized(rng):
    x = rng.normal(size=5) * 100
    out = sincos_encode(x, num_freqs=4)
    assert out.shape == (2 * 4 * 5,)
    assert np.all(np.abs(out) <= 1.0)


def test_sincos_rows_matches_flat(rng):
    x = rng.normal(size=(3, 2))
    rows = sincos_encode_rows(x, 2)
    for i in range(3):
        assert np.array_equal(rows[i], sincos_encode(x[i], 2))


def test_sincos_rejects_bad_freqs():
    with pytest.raises(ValueError):
        sincos_encode([1.0], 0)
