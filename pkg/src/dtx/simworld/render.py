"""Software rasterizer: ground/sky shading, map polylines, and agents as
class-colored filled boxes, drawn in painter's order per camera."""
import numpy as np

from ..geometry import CameraModel, RigidTransform, apply, compose
from ..kernels import draw_polyline, fill_polygon

SKY_COLOR = np.array([148, 168, 196], dtype=np.float64)
GROUND_COLOR = np.array([94, 98, 92], dtype=np.float64)
MAP_COLORS = {
    0: (250, 250, 250),   # centerline
    1: (255, 160, 40),    # boundary
    2: (240, 220, 60),    # crossing
}
AGENT_COLORS = {
    0: (205, 48, 48),     # car
    1: (48, 82, 205),     # truck
}
NEAR_Z = 0.3
CAMERA_HEIGHT = 1.5


def default_rig(image_size=96, fov_deg=60.0, n_cameras=4):
    """Front/left/rear/right cameras at equal yaw spacing."""
    cams = []
    for i in range(n_cameras):
        yaw = 2.0 * np.pi * i / n_cameras
        c, s = np.cos(yaw), np.sin(yaw)
        fwd = np.array([c, s, 0.0])
        right = np.array([s, -c, 0.0])
        down = np.array([0.0, 0.0, -1.0])
        rot = np.column_stack([right, down, fwd])
        ext = RigidTransform.from_rotation_translation(rot, [0.0, 0.0, CAMERA_HEIGHT])
        cams.append(CameraModel.from_fov(fov_deg, image_size, image_size, ext))
    return cams


def _convex_hull(pts):
    """Monotone-chain hull of 2D points, counterclockwise."""
    pts = sorted(map(tuple, pts))
    if len(pts) <= 2:
        return np.array(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


def _shade_background(img, cam):
    """Sky above the horizon, distance-faded ground below it."""
    h, w = img.shape[:2]
    kinv = np.linalg.inv(cam.intrinsics)
    us, vs = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    rays_cam = np.stack([us, vs, np.ones_like(us)], axis=-1) @ kinv.T
    rays = rays_cam @ cam.extrinsics.rotation.T          # ego frame
    origin_z = cam.extrinsics.translation[2]
    dz = rays[..., 2]
    below = dz < -1e-9
    t = np.where(below, -origin_z / np.where(below, dz, -1.0), np.inf)
    dist = t * np.linalg.norm(rays, axis=-1)
    fade = 1.0 / (1.0 + np.where(np.isfinite(dist), dist, 0.0) / 25.0)
    ground = GROUND_COLOR[None, None, :] * fade[..., None]
    img[:] = np.where(below[..., None], ground, SKY_COLOR[None, None, :]).astype(np.uint8)


def _project(cam_from_ego, cam, pts_ego):
    """Ego-frame points -> (pixels (N,2), depth (N,)); no culling."""
    pc = apply(cam_from_ego, pts_ego)
    z = pc[:, 2]
    uvw = pc @ cam.intrinsics.T
    with np.errstate(divide="ignore", invalid="ignore"):
        px = uvw[:, :2] / uvw[:, 2:3]
    return px, z


def _draw_map(img, cam_from_ego, cam, polylines_ego):
    for pts, cls in polylines_ego:
        pts3 = np.column_stack([pts, np.full(len(pts), 0.05)])
        px, z = _project(cam_from_ego, cam, pts3)
        ok = z > NEAR_Z
        color = MAP_COLORS[int(cls)]
        for i in range(len(pts) - 1):
            if ok[i] and ok[i + 1]:
                draw_polyline(img, px[i:i + 2, 0].copy(), px[i:i + 2, 1].copy(), color)


def _box_corners(x, y, yaw, size):
    l, w, h = size
    dx = np.array([1, 1, -1, -1, 1, 1, -1, -1]) * l / 2.0
    dy = np.array([1, -1, -1, 1, 1, -1, -1, 1]) * w / 2.0
    dz = np.array([0, 0, 0, 0, 1, 1, 1, 1]) * h
    c, s = np.cos(yaw), np.sin(yaw)
    return np.column_stack([x + c * dx - s * dy, y + s * dx + c * dy, dz])


def _draw_agents(img, cam_from_ego, cam, agents_ego):
    """agents_ego: [(x, y, yaw, size, cls)] in ego frame; far to near."""
    order = sorted(agents_ego, key=lambda a: -(a[0] ** 2 + a[1] ** 2))
    for x, y, yaw, size, cls in order:
        corners = _box_corners(x, y, yaw, size)
        px, z = _project(cam_from_ego, cam, corners)
        infront = z > NEAR_Z
        if infront.sum() < 3:
            continue
        hull = _convex_hull(px[infront])
        if hull.shape[0] < 3:
            continue
        fill_polygon(img, np.ascontiguousarray(hull[:, 0]),
                     np.ascontiguousarray(hull[:, 1]), AGENT_COLORS[int(cls)])


def render_frame(scn, ego_state, t, cameras):
    """Raster images for all cameras at one frame: (N_c, H, W, 3) uint8."""
    ego_pose = RigidTransform.from_xy_yaw(ego_state.x, ego_state.y, ego_state.yaw)
    world_to_ego = ego_pose.inverse()

    polylines_ego = []
    for pts, cls in scn.map_polylines:
        pts3 = np.column_stack([pts, np.zeros(len(pts))])
        polylines_ego.append((apply(world_to_ego, pts3)[:, :2], cls))

    agents_ego = []
    for agent in scn.agents:
        x, y, yaw, _ = agent.state(t)
        p = apply(world_to_ego, [x, y, 0.0])
        agents_ego.append((p[0], p[1], yaw - ego_state.yaw, agent.size, agent.cls))

    out = []
    for cam in cameras:
        img = np.zeros((cam.height, cam.width, 3), dtype=np.uint8)
        cam_from_ego = cam.extrinsics.inverse()
        _shade_background(img, cam)
        _draw_map(img, cam_from_ego, cam, polylines_ego)
        _draw_agents(img, cam_from_ego, cam, agents_ego)
        out.append(img)
    return np.stack(out)
