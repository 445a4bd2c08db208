"""Command-line interface: config precedence, subcommand round trips,
and exit codes."""
import os

import numpy as np
import pytest

from dtx.cli import (EXIT_CONFIG, EXIT_OK, ConfigError, build_parser,
                     load_config, main)
from dtx.harness import load_checkpoint

TINY = [
    "--set", "model.num_layers=2", "--set", "model.hidden=32",
    "--set", "model.heads=2", "--set", "model.n_agent=6",
    "--set", "model.n_map=2", "--set", "model.n_point=4",
    "--set", "model.t_queue=3", "--set", "model.k_keep=4",
    "--set", "model.n_cameras=2", "--set", "model.image_size=32",
    "--set", "model.patch_size=16", "--set", "model.k_depth=4",
    "--set", "model.num_freqs=2",
    "--set", "world.episode_len=4", "--set", "world.image_size=32",
]


# -- parser -----------------------------------------------------------------

@pytest.mark.parametrize("argv", [["--help"], ["generate", "--help"],
                                  ["train", "--help"], ["eval", "--help"],
                                  ["bench", "--help"]])
def test_help_exits_zero(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(argv)
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out.lower()


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([])
    assert exc.value.code == 2


# -- config -----------------------------------------------------------------

def test_load_config_defaults():
    cfg = load_config()
    assert cfg["model"].num_layers == 3
    assert cfg["train"].lr == pytest.approx(1e-4)


def test_override_precedence(tmp_path):
    path = os.path.join(tmp_path, "cfg.ini")
    with open(path, "w") as fh:
        fh.write("[train]\nlr = 0.01\nsteps = 7\n")
    cfg = load_config(path)
    assert cfg["train"].lr == 0.01 and cfg["train"].steps == 7
    cfg = load_config(path, overrides=["train.lr=0.5"])
    assert cfg["train"].lr == 0.5       # flag beats file
    assert cfg["train"].steps == 7      # file beats default


def test_unknown_key_names_the_key():
    with pytest.raises(ConfigError, match="train.banana"):
        load_config(overrides=["train.banana=1"])
    with pytest.raises(ConfigError, match="fruit"):
        load_config(overrides=["fruit.lr=1"])
    with pytest.raises(ConfigError):
        load_config(overrides=["not-dotted"])


def test_unknown_key_exit_code(tmp_path, capsys):
    code = main(["generate", "--out", str(tmp_path), "--set", "world.nope=1"])
    assert code == EXIT_CONFIG
    assert "world.nope" in capsys.readouterr().err


def test_missing_config_file_rejected(tmp_path):
    code = main(["generate", "--out", str(tmp_path),
                 "--config", os.path.join(tmp_path, "absent.ini")])
    assert code == EXIT_CONFIG


def test_bad_boolean_rejected():
    with pytest.raises(ConfigError):
        load_config(overrides=["bench.desk=maybe"])


# -- generate ---------------------------------------------------------------

def test_generate_writes_named_scenarios(tmp_path):
    out = os.path.join(tmp_path, "scns")
    code = main(["generate", "--out", out, "--families", "straight,turn",
                 "--count", "5", "--seed", "0"] + TINY)
    assert code == EXIT_OK
    names = sorted(os.listdir(out))
    assert names == ["scenario_0000_straight.json", "scenario_0001_turn.json",
                     "scenario_0002_straight.json", "scenario_0003_turn.json",
                     "scenario_0004_straight.json"]


def test_generate_byte_identical_rerun(tmp_path):
    a = os.path.join(tmp_path, "a")
    b = os.path.join(tmp_path, "b")
    for out in (a, b):
        assert main(["generate", "--out", out, "--families", "merge",
                     "--count", "2"] + TINY) == EXIT_OK
    for name in os.listdir(a):
        with open(os.path.join(a, name), "rb") as fa, \
                open(os.path.join(b, name), "rb") as fb:
            assert fa.read() == fb.read()


def test_generate_empty_families_rejected(tmp_path):
    code = main(["generate", "--out", str(tmp_path), "--families", " , "])
    assert code == EXIT_CONFIG


# -- train / eval -----------------------------------------------------------

@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("run"))
    code = main(["train", "--out", out, "--steps", "3", "--clips", "1"] + TINY)
    assert code == EXIT_OK
    return out


def test_train_outputs(trained):
    lines = open(os.path.join(trained, "loss.csv")).read().strip().splitlines()
    assert lines[0].startswith("step,")
    assert len(lines) == 4  # header + 3 steps
    ckpt = load_checkpoint(os.path.join(trained, "model.dtxf"))
    assert ckpt["extra"]["steps"] == 3
    # preset depth/width win; per-run token counts persist
    assert ckpt["config"].hidden == 256
    assert ckpt["config"].n_agent == 6
    assert ckpt["config"].image_size == 32


def test_train_preset_recorded(tmp_path):
    out = os.path.join(tmp_path, "run")
    code = main(["train", "--out", out, "--preset", "small", "--steps", "1",
                 "--clips", "1",
                 "--set", "world.episode_len=2", "--set", "world.image_size=64",
                 "--set", "model.image_size=64", "--set", "model.patch_size=16",
                 "--set", "model.n_cameras=2"])
    assert code == EXIT_OK
    ckpt = load_checkpoint(os.path.join(out, "model.dtxf"))
    assert ckpt["config"].num_layers == 3
    assert ckpt["config"].hidden == 256


def test_eval_open_csv(trained, tmp_path):
    out = os.path.join(tmp_path, "metrics.csv")
    code = main(["eval", "--checkpoint", os.path.join(trained, "model.dtxf"),
                 "--mode", "open", "--out", out,
                 "--set", "eval.families=straight", "--set", "eval.count=1",
                 "--set", "world.episode_len=3", "--set", "world.image_size=32"])
    assert code == EXIT_OK
    lines = open(out).read().strip().splitlines()
    assert lines[0].startswith("kind,")
    assert len(lines) == 2
    assert lines[1].split(",")[0] == "open"


def test_eval_robust_csv_one_row_per_kind(trained, tmp_path):
    out = os.path.join(tmp_path, "robust.csv")
    code = main(["eval", "--checkpoint", os.path.join(trained, "model.dtxf"),
                 "--mode", "robust", "--out", out,
                 "--set", "eval.families=straight", "--set", "eval.count=1",
                 "--set", "world.episode_len=2", "--set", "world.image_size=32"])
    assert code == EXIT_OK
    lines = open(out).read().strip().splitlines()
    kinds = [ln.split(",")[0] for ln in lines[1:]]
    assert sorted(kinds) == ["blur", "calibration", "camera_crash", "noise"]


def test_eval_closed_runs(trained, tmp_path):
    out = os.path.join(tmp_path, "closed.csv")
    code = main(["eval", "--checkpoint", os.path.join(trained, "model.dtxf"),
                 "--mode", "closed", "--out", out,
                 "--set", "eval.families=straight", "--set", "eval.count=1",
                 "--set", "world.episode_len=3", "--set", "world.image_size=32"])
    assert code == EXIT_OK
    lines = open(out).read().strip().splitlines()
    assert lines[1].split(",")[0] == "closed"


def test_eval_missing_checkpoint_runtime_error(tmp_path, capsys):
    code = main(["eval", "--checkpoint", os.path.join(tmp_path, "none.dtxf")])
    assert code == 3


# -- bench ------------------------------------------------------------------

def test_bench_small_writes_csv(tmp_path):
    out = os.path.join(tmp_path, "bench.csv")
    code = main(["bench", "--preset", "small", "--out", out,
                 "--set", "bench.iters=1", "--set", "bench.warmup=3"])
    assert code == EXIT_OK
    lines = open(out).read().strip().splitlines()
    header = lines[0].split(",")
    assert "latency_mean_s" in header and "params" in header
    assert len(lines) == 2
    row = dict(zip(header, lines[1].split(",")))
    assert row["preset"] == "small"
    assert int(row["layers"]) == 3 and int(row["hidden"]) == 256
