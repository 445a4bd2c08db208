"""Binary checkpoint container.

Layout: magic "DTXF", format version u32, length-prefixed JSON config
blob, named float64 parameter table, optional optimizer moments, a JSON
RNG-state blob, and an optional temporal-queue state. Round trips are
bit-exact.
"""
import json
import struct

import numpy as np

from ..config import ModelConfig
from ..model import DriveTransformer
from ..temporal import TemporalQueue

MAGIC = b"DTXF"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _write_blob(fh, obj):
    raw = json.dumps(obj, sort_keys=True).encode()
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_blob(fh):
    (n,) = struct.unpack("<I", fh.read(4))
    return json.loads(fh.read(n).decode())


def _write_array(fh, arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    fh.write(struct.pack("<B", arr.ndim))
    for d in arr.shape:
        fh.write(struct.pack("<I", d))
    fh.write(arr.tobytes())


def _read_array(fh):
    (ndim,) = struct.unpack("<B", fh.read(1))
    shape = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(ndim))
    count = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(fh.read(8 * count), dtype=np.float64)
    return data.reshape(shape).copy()


def _write_named_table(fh, table):
    fh.write(struct.pack("<I", len(table)))
    for name in sorted(table):
        raw = name.encode()
        fh.write(struct.pack("<H", len(raw)))
        fh.write(raw)
        _write_array(fh, table[name])


def _read_named_table(fh):
    (count,) = struct.unpack("<I", fh.read(4))
    out = {}
    for _ in range(count):
        (n,) = struct.unpack("<H", fh.read(2))
        name = fh.read(n).decode()
        out[name] = _read_array(fh)
    return out


def _queue_state_to_json(state):
    def enc(x):
        return x.tolist() if isinstance(x, np.ndarray) else x

    return {
        "capacity": state["capacity"],
        "entries": {
            task: [{k: enc(v) for k, v in item.items()} for item in items]
            for task, items in state["entries"].items()
        },
    }


def save_checkpoint(path, model, optimizer=None, rng_state=None, queue=None,
                    extra=None):
    named = model.named_parameters()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        _write_blob(fh, {"model": model.cfg.to_dict(), "seed": model.seed,
                         "extra": extra or {}})
        _write_named_table(fh, {k: v.data for k, v in named.items()})
        if optimizer is not None:
            fh.write(struct.pack("<B", 1))
            fh.write(struct.pack("<Q", optimizer.t))
            order = sorted(named)
            index = {id(p): name for name, p in named.items()}
            m = {index[id(p)]: optimizer.m[i] for i, p in enumerate(optimizer.params)}
            v = {index[id(p)]: optimizer.v[i] for i, p in enumerate(optimizer.params)}
            _write_named_table(fh, {k: m[k] for k in order})
            _write_named_table(fh, {k: v[k] for k in order})
        else:
            fh.write(struct.pack("<B", 0))
        _write_blob(fh, rng_state if rng_state is not None else {})
        if queue is not None:
            fh.write(struct.pack("<B", 1))
            _write_blob(fh, _queue_state_to_json(queue.to_state()))
        else:
            fh.write(struct.pack("<B", 0))


def load_checkpoint(path):
    """Returns a dict with config, seed, params, optimizer state, RNG
    state, queue state, and the extra blob."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise CheckpointError("not a checkpoint file (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise CheckpointError(
                f"unsupported checkpoint version {version} (expected {VERSION})")
        meta = _read_blob(fh)
        params = _read_named_table(fh)
        (has_opt,) = struct.unpack("<B", fh.read(1))
        opt = None
        if has_opt:
            (t,) = struct.unpack("<Q", fh.read(8))
            m = _read_named_table(fh)
            v = _read_named_table(fh)
            opt = {"t": t, "m": m, "v": v}
        rng_state = _read_blob(fh)
        (has_queue,) = struct.unpack("<B", fh.read(1))
        queue = None
        if has_queue:
            qs = _read_blob(fh)
            queue = TemporalQueue.from_state({
                "capacity": qs["capacity"],
                "entries": {
                    task: [
                        {k: (np.asarray(v) if isinstance(v, list) else v)
                         for k, v in item.items()}
                        for item in items
                    ]
                    for task, items in qs["entries"].items()
                },
            })
    return {
        "config": ModelConfig.from_dict(meta["model"]),
        "seed": meta["seed"],
        "extra": meta["extra"],
        "params": params,
        "optimizer": opt,
        "rng_state": rng_state or None,
        "queue": queue,
    }


def restore_model(path):
    """Rebuild the model (and optionally its optimizer moments) from a
    checkpoint file."""
    ckpt = load_checkpoint(path)
    model = DriveTransformer(ckpt["config"], seed=ckpt["seed"])
    model.load_parameter_table(ckpt["params"])
    return model, ckpt


def load_optimizer_state(optimizer, model, opt_state):
    """Apply a checkpointed {t, m, v} table onto a fresh optimizer built
    from model.parameters()."""
    named = model.named_parameters()
    index = {id(p): name for name, p in named.items()}
    optimizer.t = int(opt_state["t"])
    optimizer.m = [np.array(opt_state["m"][index[id(p)]]) for p in optimizer.params]
    optimizer.v = [np.array(opt_state["v"][index[id(p)]]) for p in optimizer.params]
