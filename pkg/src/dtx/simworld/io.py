"""On-disk formats: scenarios and labels as line-delimited JSON, images
as a raw RGB container with a fixed 16-byte record header."""
import json
import struct

import numpy as np

from ..labels import FrameLabels
from ..tokenizer import CanbusState
from .scenario import Agent, Scenario

IMAGE_MAGIC = b"DTXI"
_HEADER = struct.Struct("<4sIII")  # magic, width, height, camera index


def scenario_to_record(scn):
    return {
        "family": scn.family,
        "seed": scn.seed,
        "map_polylines": [[pts.tolist(), int(cls)] for pts, cls in scn.map_polylines],
        "agents": [
            {"size": a.size.tolist(), "cls": int(a.cls), "states": a.states.tolist()}
            for a in scn.agents
        ],
        "route": scn.route.tolist(),
        "ego_start": scn.ego_start.tolist(),
        "ego_speed0": scn.ego_speed0,
        "cruise_speed": scn.cruise_speed,
        "goal_s": scn.goal_s,
        "episode_len": scn.episode_len,
        "frame_period": scn.frame_period,
    }


def scenario_from_record(rec):
    return Scenario(
        family=rec["family"],
        seed=int(rec["seed"]),
        map_polylines=[(np.asarray(pts, dtype=np.float64), int(cls))
                       for pts, cls in rec["map_polylines"]],
        agents=[Agent(np.asarray(a["size"], dtype=np.float64), int(a["cls"]),
                      np.asarray(a["states"], dtype=np.float64))
                for a in rec["agents"]],
        route=np.asarray(rec["route"], dtype=np.float64),
        ego_start=np.asarray(rec["ego_start"], dtype=np.float64),
        ego_speed0=float(rec["ego_speed0"]),
        cruise_speed=float(rec["cruise_speed"]),
        goal_s=float(rec["goal_s"]),
        episode_len=int(rec["episode_len"]),
        frame_period=float(rec["frame_period"]),
    )


def save_scenario(path, scn):
    with open(path, "w") as fh:
        fh.write(json.dumps(scenario_to_record(scn), sort_keys=True) + "\n")


def load_scenario(path):
    with open(path) as fh:
        return scenario_from_record(json.loads(fh.readline()))


def _canbus_record(canbus):
    return {
        "speed": canbus.speed, "yaw_rate": canbus.yaw_rate,
        "steer": canbus.steer, "throttle": canbus.throttle,
        "brake": canbus.brake, "command": canbus.command.tolist(),
    }


def save_labels(path, records):
    """records: iterable of (t, ego_state, labels)."""
    with open(path, "w") as fh:
        for t, state, labels in records:
            rec = labels.to_record()
            rec["t"] = int(t)
            rec["ego"] = [state.x, state.y, state.yaw, state.speed]
            rec["canbus"] = _canbus_record(labels.canbus)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_labels(path):
    out = []
    with open(path) as fh:
        for line in fh:
            rec = json.loads(line)
            canbus = CanbusState(
                speed=rec["canbus"]["speed"], yaw_rate=rec["canbus"]["yaw_rate"],
                steer=rec["canbus"]["steer"], throttle=rec["canbus"]["throttle"],
                brake=rec["canbus"]["brake"],
                command=np.asarray(rec["canbus"]["command"]))
            labels = FrameLabels.from_record(rec, canbus=canbus)
            out.append((int(rec["t"]), np.asarray(rec["ego"], dtype=np.float64), labels))
    return out


def write_images(fh_or_path, images, camera_indices=None):
    """Append-style writer: each record is a 16-byte header followed by
    height*width*3 bytes of row-major RGB."""
    own = isinstance(fh_or_path, (str, bytes))
    fh = open(fh_or_path, "wb") if own else fh_or_path
    try:
        for i, img in enumerate(images):
            img = np.ascontiguousarray(img, dtype=np.uint8)
            h, w = img.shape[:2]
            cam = camera_indices[i] if camera_indices is not None else i
            fh.write(_HEADER.pack(IMAGE_MAGIC, w, h, cam))
            fh.write(img.tobytes())
    finally:
        if own:
            fh.close()


def read_images(fh_or_path):
    """Read all image records: list of (camera index, (H, W, 3) array)."""
    own = isinstance(fh_or_path, (str, bytes))
    fh = open(fh_or_path, "rb") if own else fh_or_path
    out = []
    try:
        while True:
            head = fh.read(_HEADER.size)
            if not head:
                break
            magic, w, h, cam = _HEADER.unpack(head)
            if magic != IMAGE_MAGIC:
                raise ValueError("bad image record magic")
            buf = fh.read(h * w * 3)
            if len(buf) != h * w * 3:
                raise ValueError("truncated image record")
            out.append((cam, np.frombuffer(buf, dtype=np.uint8).reshape(h, w, 3)))
    finally:
        if own:
            fh.close()
    return out
