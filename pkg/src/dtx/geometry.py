"""Camera models, ray lifting, rigid transforms, and sinusoidal encodings.

All functions here are pure and operate on plain NumPy arrays; gradients
never flow through geometry (anchors are detached state).
"""
from dataclasses import dataclass, field

import numpy as np

_ORTHO_TOL = 1e-8


class GeometryError(ValueError):
    pass


def _orthonormalize(r):
    """Project a near-rotation onto SO(3); reject reflections."""
    uu, _, vv = np.linalg.svd(r)
    rot = uu @ vv
    if np.linalg.det(rot) < 0:
        raise GeometryError("rotation block has negative determinant")
    return rot


class RigidTransform:
    """4x4 homogeneous rigid transform; rotation re-orthonormalized on
    construction and det(R) asserted +1."""

    __slots__ = ("mat",)

    def __init__(self, mat):
        mat = np.asarray(mat, dtype=np.float64)
        if mat.shape != (4, 4):
            raise GeometryError("rigid transform must be 4x4")
        if not np.allclose(mat[3], [0.0, 0.0, 0.0, 1.0], atol=_ORTHO_TOL):
            raise GeometryError("bottom row must be [0,0,0,1]")
        r = _orthonormalize(mat[:3, :3])
        self.mat = np.eye(4)
        self.mat[:3, :3] = r
        self.mat[:3, 3] = mat[:3, 3]

    @classmethod
    def identity(cls):
        return cls(np.eye(4))

    @classmethod
    def from_rotation_translation(cls, r, t):
        m = np.eye(4)
        m[:3, :3] = r
        m[:3, 3] = t
        return cls(m)

    @classmethod
    def from_xy_yaw(cls, x, y, yaw, z=0.0):
        c, s = np.cos(yaw), np.sin(yaw)
        r = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return cls.from_rotation_translation(r, [x, y, z])

    @property
    def rotation(self):
        return self.mat[:3, :3]

    @property
    def translation(self):
        return self.mat[:3, 3]

    def inverse(self):
        r = self.mat[:3, :3]
        t = self.mat[:3, 3]
        return RigidTransform.from_rotation_translation(r.T, -r.T @ t)

    def __repr__(self):
        return f"RigidTransform({self.mat.tolist()})"


def compose(a, b):
    """a ∘ b: apply b first, then a."""
    return RigidTransform(a.mat @ b.mat)


def apply(t, p):
    """Apply a rigid transform to one 3D point or an (..., 3) array."""
    p = np.asarray(p, dtype=np.float64)
    return p @ t.rotation.T + t.translation


@dataclass
class CameraModel:
    """Pinhole camera: 3x3 intrinsics and a rigid camera-to-ego transform.

    Camera frame: +z forward (optical axis), +x right, +y down.
    """

    intrinsics: np.ndarray
    extrinsics: RigidTransform
    width: int
    height: int

    def __post_init__(self):
        self.intrinsics = np.asarray(self.intrinsics, dtype=np.float64)
        if self.intrinsics.shape != (3, 3):
            raise GeometryError("intrinsics must be 3x3")
        if abs(np.linalg.det(self.intrinsics)) < 1e-12:
            raise GeometryError("singular intrinsics")

    @classmethod
    def from_fov(cls, fov_deg, width, height, extrinsics):
        f = (width / 2.0) / np.tan(np.deg2rad(fov_deg) / 2.0)
        k = np.array([[f, 0.0, width / 2.0], [0.0, f, height / 2.0], [0.0, 0.0, 1.0]])
        return cls(k, extrinsics, width, height)


@dataclass
class DepthBins:
    """Equally spaced depth samples along a pixel ray."""

    k_depth: int = 8
    d_min: float = 1.0
    d_max: float = 32.0

    def __post_init__(self):
        if self.k_depth < 1:
            raise GeometryError("k_depth must be >= 1")
        if not (0.0 < self.d_min < self.d_max):
            raise GeometryError("need 0 < d_min < d_max")

    def depths(self):
        if self.k_depth == 1:
            return np.array([self.d_min])
        return np.linspace(self.d_min, self.d_max, self.k_depth)


def unproject(cam, pixel, depth):
    """Lift a pixel at a given depth into the camera frame."""
    u, v = pixel
    kinv = np.linalg.inv(cam.intrinsics)
    return kinv @ np.array([u * depth, v * depth, depth])


def ray_points(cam, pixel, bins):
    """K equally spaced 3D ego-frame points along the ray of a pixel,
    ordered by increasing depth."""
    u, v = pixel
    if not (0.0 <= u <= cam.width and 0.0 <= v <= cam.height):
        raise GeometryError(f"pixel {pixel} outside image bounds")
    kinv = np.linalg.inv(cam.intrinsics)
    pts = []
    for d in bins.depths():
        p_cam = kinv @ np.array([u * d, v * d, d])
        pts.append(apply(cam.extrinsics, p_cam))
    return np.array(pts)


def sincos_encode(x, num_freqs):
    """Interleaved sin/cos at geometric frequencies 2^k, per coordinate.

    Output length = 2 * num_freqs * len(x); bounded in [-1, 1].
    """
    if num_freqs < 1:
        raise ValueError("num_freqs must be >= 1")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    return sincos_encode_rows(x[None, :], num_freqs)[0]


def sincos_encode_rows(x, num_freqs):
    """Row-wise sincos_encode: (n, k) -> (n, 2 * num_freqs * k)."""
    if num_freqs < 1:
        raise ValueError("num_freqs must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    n, k = x.shape
    freqs = 2.0 ** np.arange(num_freqs)
    ang = x[:, :, None] * freqs[None, None, :]  # (n, k, F)
    out = np.empty((n, k, num_freqs, 2))
    out[:, :, :, 0] = np.sin(ang)
    out[:, :, :, 1] = np.cos(ang)
    return out.reshape(n, 2 * num_freqs * k)
