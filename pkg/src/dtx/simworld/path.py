"""Arc-length parameterized 2D polyline paths (routes and lane lines)."""
import numpy as np


class Path:
    """Dense polyline with arc-length lookup, projection, and offsets."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        if pts.shape[0] < 2:
            raise ValueError("path needs at least two points")
        self.points = pts
        seg = np.diff(pts, axis=0)
        self.seglen = np.linalg.norm(seg, axis=1)
        if np.any(self.seglen < 1e-12):
            keep = np.concatenate([[True], self.seglen >= 1e-12])
            self.points = pts = pts[keep]
            seg = np.diff(pts, axis=0)
            self.seglen = np.linalg.norm(seg, axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(self.seglen)])
        self.tangent = seg / self.seglen[:, None]

    @property
    def length(self):
        return float(self.cum[-1])

    def _locate(self, s):
        s = np.clip(s, 0.0, self.length)
        i = int(np.searchsorted(self.cum, s, side="right")) - 1
        i = min(max(i, 0), len(self.seglen) - 1)
        t = (s - self.cum[i]) / self.seglen[i]
        return i, t

    def position(self, s):
        i, t = self._locate(s)
        return self.points[i] + t * (self.points[i + 1] - self.points[i])

    def heading(self, s):
        i, _ = self._locate(s)
        tx, ty = self.tangent[i]
        return float(np.arctan2(ty, tx))

    def curvature(self, s, ds=2.0):
        """Finite-difference heading change per meter around s."""
        h0 = self.heading(max(s - ds / 2, 0.0))
        h1 = self.heading(min(s + ds / 2, self.length))
        d = np.arctan2(np.sin(h1 - h0), np.cos(h1 - h0))
        return abs(d) / ds

    def project(self, xy):
        """Closest point on the path: returns (arc length, signed lateral).

        Lateral is positive to the left of the path direction.
        """
        xy = np.asarray(xy, dtype=np.float64)
        p0 = self.points[:-1]
        d = self.points[1:] - p0
        t = np.clip(np.einsum("ij,ij->i", xy - p0, d) / (self.seglen ** 2), 0.0, 1.0)
        proj = p0 + t[:, None] * d
        dist2 = np.sum((proj - xy) ** 2, axis=1)
        i = int(np.argmin(dist2))
        s = self.cum[i] + t[i] * self.seglen[i]
        tx, ty = self.tangent[i]
        rel = xy - proj[i]
        lat = -ty * rel[0] + tx * rel[1]
        return float(s), float(lat)

    def offset(self, w):
        """Parallel polyline shifted by w meters to the left."""
        tan = np.vstack([self.tangent, self.tangent[-1]])
        normal = np.column_stack([-tan[:, 1], tan[:, 0]])
        return self.points + w * normal

    def resample(self, spacing):
        """Evenly spaced points along the path (includes both ends)."""
        n = max(int(np.ceil(self.length / spacing)) + 1, 2)
        ss = np.linspace(0.0, self.length, n)
        return np.array([self.position(s) for s in ss])
