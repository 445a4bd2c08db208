"""Command-line entry point: generate / train / eval / bench.

Config files are flat sectioned key=value text (sections: model, train,
world, eval, bench). Precedence: flag overrides > file values > built-in
defaults. Exit codes: 0 success, 2 config error, 3 runtime error, 4
non-finite loss abort.
"""
import argparse
import configparser
import csv
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .config import ModelConfig, PRESETS, TrainConfig, WorldConfig, LossWeights
from .model import DriveTransformer

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_NAN = 4


class ConfigError(ValueError):
    pass


@dataclass
class EvalSection:
    families: str = "cut_in,emergency_brake,merge,turn,straight"
    count: int = 5
    seed: int = 0
    intensity: float = 1.0


@dataclass
class BenchSection:
    iters: int = 5
    warmup: int = 3
    desk: bool = True


_SECTIONS = {
    "model": ModelConfig,
    "train": TrainConfig,
    "world": WorldConfig,
    "eval": EvalSection,
    "bench": BenchSection,
}


def _coerce(raw, default):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"invalid boolean {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config(path=None, overrides=()):
    """Build all section objects from defaults, then file, then --set
    overrides. Unknown sections or keys are rejected."""
    values = {name: {f.name: f.default for f in fields(cls)}
              for name, cls in _SECTIONS.items()}

    def apply(section, key, raw, origin):
        if section not in values:
            raise ConfigError(f"unknown config section [{section}] ({origin})")
        if key not in values[section]:
            raise ConfigError(f"unknown config key {section}.{key} ({origin})")
        values[section][key] = _coerce(raw, values[section][key])

    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        parser.read(path)
        for section in parser.sections():
            for key, raw in parser.items(section):
                apply(section, key, raw, path)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        dotted, raw = item.split("=", 1)
        section, key = dotted.split(".", 1)
        apply(section, key, raw, "--set")

    out = {}
    for name, cls in _SECTIONS.items():
        section_values = {
            k: (v.copy() if isinstance(v, np.ndarray) else v)
            for k, v in values[name].items()
        }
        out[name] = cls(**section_values)
    return out


def _apply_preset(model_cfg, preset, desk=True):
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    overrides = {f.name: getattr(model_cfg, f.name) for f in fields(ModelConfig)}
    overrides.pop("num_layers")
    overrides.pop("hidden")
    if desk:
        defaults = ModelConfig()
        for key, val in (("n_agent", 24), ("n_map", 8), ("n_point", 6), ("heads", 4)):
            if overrides[key] == getattr(defaults, key):
                overrides[key] = val
    return ModelConfig.preset(preset, **overrides)


def _thread_cap():
    cap = os.environ.get("DTX_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def cmd_generate(args):
    from .simworld import generate_scenario, save_scenario

    cfg = load_config(args.config, args.set)
    world = cfg["world"]
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    if not families:
        raise ConfigError("no scenario families given")
    os.makedirs(args.out, exist_ok=True)
    written = []
    for i in range(args.count):
        family = families[i % len(families)]
        scn = generate_scenario(family, args.seed + i // len(families), world)
        path = os.path.join(args.out, f"scenario_{i:04d}_{family}.json")
        save_scenario(path, scn)
        written.append(path)
    print(f"wrote {len(written)} scenarios to {args.out}")
    return EXIT_OK


def cmd_train(args):
    from .harness import generate_clips, save_checkpoint, train
    from .harness.train import NanLossError

    cfg = load_config(args.config, args.set)
    model_cfg = _apply_preset(cfg["model"], args.preset or cfg["train"].preset)
    tcfg = cfg["train"]
    if args.steps is not None:
        tcfg.steps = args.steps
    os.makedirs(args.out, exist_ok=True)
    clips = generate_clips(model_cfg, cfg["world"],
                           count=args.clips, seed=tcfg.seed)
    model = DriveTransformer(model_cfg, seed=tcfg.seed)
    csv_path = os.path.join(args.out, "loss.csv")
    try:
        history, opt = train(model, clips, tcfg, LossWeights(), csv_path=csv_path)
    except NanLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NAN
    ckpt = os.path.join(args.out, "model.dtxf")
    save_checkpoint(ckpt, model, optimizer=opt,
                    extra={"steps": len(history), "final_loss": history[-1]["total"]})
    print(f"trained {len(history)} steps; final loss "
          f"{history[-1]['total']:.4f}; checkpoint at {ckpt}")
    return EXIT_OK


def _metric_rows(reports):
    rows = []
    for kind, report in reports.items():
        row = {"kind": kind}
        row.update(report.to_dict())
        rows.append(row)
    return rows


def cmd_eval(args):
    from .harness import (evaluate_closed_loop, evaluate_open_loop,
                          evaluate_robust, generate_clips, model_planner,
                          restore_model)
    from .simworld import default_rig, generate_scenario

    cfg = load_config(args.config, args.set)
    esec = cfg["eval"]
    model, _ = restore_model(args.checkpoint)
    model_cfg = model.cfg
    families = [f.strip() for f in esec.families.split(",") if f.strip()]

    if args.mode in ("open", "robust"):
        clips = generate_clips(model_cfg, cfg["world"], families=families,
                               count=esec.count, seed=esec.seed)
        if args.mode == "open":
            reports = {"open": evaluate_open_loop(model, clips, model_cfg)}
        else:
            reports = evaluate_robust(model, clips, model_cfg,
                                      seed=esec.seed, intensity=esec.intensity)
    else:  # closed
        scenarios = [generate_scenario(families[i % len(families)],
                                       esec.seed + i // len(families),
                                       cfg["world"])
                     for i in range(esec.count)]
        cameras = default_rig(model_cfg.image_size,
                              n_cameras=model_cfg.n_cameras)

        def factory(scn):
            return model_planner(model, model_cfg)

        reports = {"closed": evaluate_closed_loop(factory, scenarios,
                                                  model_cfg, cameras=cameras)}

    rows = _metric_rows(reports)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {len(rows)} metric rows to {args.out}")
    for row in rows:
        printable = {k: (round(v, 4) if isinstance(v, float) else v)
                     for k, v in row.items()}
        print(printable)
    return EXIT_OK


def cmd_bench(args):
    from .harness import bench_presets, write_bench_csv

    cfg = load_config(args.config, args.set)
    bsec = cfg["bench"]
    presets = [args.preset] if args.preset else list(PRESETS)
    overrides = {}
    if bsec.desk:
        overrides = dict(n_agent=24, n_map=8, n_point=6, heads=4)
    rows = bench_presets(presets=presets, n_iters=bsec.iters,
                         warmup=bsec.warmup, overrides=overrides)
    if args.out:
        write_bench_csv(args.out, rows)
        print(f"wrote {len(rows)} bench rows to {args.out}")
    for row in rows:
        printable = {k: (round(v, 5) if isinstance(v, float) else v)
                     for k, v in row.items()}
        print(printable)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dtx",
        description="Desk-scale end-to-end driving stack: data generation, "
                    "training, evaluation, and benchmarking.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help="sectioned key=value config file")
        p.add_argument("--set", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override a config value (repeatable)")

    g = sub.add_parser("generate", help="write scenario files")
    common(g)
    g.add_argument("--families", default="cut_in,emergency_brake,merge,turn,straight")
    g.add_argument("--count", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train a model")
    common(t)
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--preset", choices=sorted(PRESETS), default=None)
    t.add_argument("--steps", type=int, default=None)
    t.add_argument("--clips", type=int, default=5)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint")
    common(e)
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--mode", choices=("open", "closed", "robust"),
                   default="open")
    e.add_argument("--out", default=None, help="metrics CSV path")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="latency/memory benchmark")
    common(b)
    b.add_argument("--preset", choices=sorted(PRESETS), default=None)
    b.add_argument("--out", default=None, help="bench CSV path")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    _thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surface as a runtime failure, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
