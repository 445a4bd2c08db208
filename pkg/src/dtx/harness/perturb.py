"""Sensor robustness perturbations. Every kind is the identity at zero
intensity; the random kinds are deterministic in (seed, intensity)."""
import numpy as np

from ..geometry import CameraModel, RigidTransform, compose

KINDS = ("camera_crash", "calibration", "blur", "noise")
CRASH_CAMERAS = (1, 3)          # left and right cameras masked to black
CALIB_ROT_SIGMA_DEG = 2.0
CALIB_TRANS_SIGMA = 0.1
BLUR_LENGTH = 5
NOISE_SIGMA = 0.08              # fraction of the 0..255 dynamic range


def perturb(images, cameras, kind, seed=0, intensity=1.0):
    """Returns (images, cameras) with the chosen corruption applied.

    images: (N_c, H, W, 3) uint8; cameras untouched except for the
    calibration kind.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown perturbation kind {kind!r}")
    images = np.array(images, dtype=np.uint8, copy=True)
    if intensity == 0.0:
        return images, list(cameras)
    if kind == "camera_crash":
        for i in CRASH_CAMERAS:
            if i < images.shape[0]:
                images[i] = 0
        return images, list(cameras)
    if kind == "calibration":
        rng = np.random.default_rng(seed)
        out = []
        for cam in cameras:
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = np.deg2rad(rng.normal(0.0, CALIB_ROT_SIGMA_DEG * intensity))
            k = np.array([[0, -axis[2], axis[1]],
                          [axis[2], 0, -axis[0]],
                          [-axis[1], axis[0], 0]])
            rot = (np.eye(3) + np.sin(angle) * k
                   + (1 - np.cos(angle)) * (k @ k))
            trans = rng.normal(0.0, CALIB_TRANS_SIGMA * intensity, size=3)
            delta = RigidTransform.from_rotation_translation(rot, trans)
            out.append(CameraModel(cam.intrinsics.copy(),
                                   compose(delta, cam.extrinsics),
                                   cam.width, cam.height))
        return images, out
    if kind == "blur":
        length = 1 + 2 * int(round((BLUR_LENGTH - 1) / 2 * intensity))
        if length <= 1:
            return images, list(cameras)
        kernel = np.ones(length) / length
        pad = length // 2
        f = images.astype(np.float64)
        padded = np.pad(f, ((0, 0), (0, 0), (pad, pad), (0, 0)), mode="edge")
        blurred = np.zeros_like(f)
        for o in range(length):
            blurred += padded[:, :, o:o + f.shape[2], :] * kernel[o]
        return np.clip(np.rint(blurred), 0, 255).astype(np.uint8), list(cameras)
    # noise
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, NOISE_SIGMA * intensity * 255.0, size=images.shape)
    noisy = np.clip(np.rint(images.astype(np.float64) + noise), 0, 255)
    return noisy.astype(np.uint8), list(cameras)
