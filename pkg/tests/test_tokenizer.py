"""Sensor tokenization and task-query initialization."""
import numpy as np
import pytest

from dtx.config import ModelConfig
from dtx.geometry import DepthBins
from dtx.model import DriveTransformer
from dtx.numerics import Tensor, mlp_forward
from dtx.simworld import default_rig
from dtx.tokenizer import (CanbusState, camera_ray_features, init_task_queries,
                           tokenize_patches, tokenize_sensors)

from conftest import make_images


@pytest.fixture
def model(tiny_cfg):
    return DriveTransformer(tiny_cfg, seed=0)


def rig(cfg):
    return default_rig(cfg.image_size, n_cameras=cfg.n_cameras)


# -- patch tokens -----------------------------------------------------------

def test_patch_shape_arithmetic(tiny_cfg, model):
    images = make_images(tiny_cfg)
    tokens = tokenize_patches(images, tiny_cfg.patch_size, model.tokenizer.patch_proj)
    hp = tiny_cfg.image_size // tiny_cfg.patch_size
    assert tokens.shape == (tiny_cfg.n_cameras, hp, hp, tiny_cfg.hidden)


def test_black_image_maps_to_bias(tiny_cfg, model):
    proj = model.tokenizer.patch_proj
    proj.biases[0].data[:] = np.arange(tiny_cfg.hidden)
    images = np.zeros((1, tiny_cfg.image_size, tiny_cfg.image_size, 3), dtype=np.uint8)
    tokens = tokenize_patches(images, tiny_cfg.patch_size, proj).data
    assert np.allclose(tokens, np.arange(tiny_cfg.hidden), atol=1e-14)


def test_white_patch_matmul_oracle(tiny_cfg, model):
    proj = model.tokenizer.patch_proj
    images = np.full((1, tiny_cfg.patch_size, tiny_cfg.patch_size, 3), 255,
                     dtype=np.uint8)
    tokens = tokenize_patches(images, tiny_cfg.patch_size, proj).data
    expect = np.ones(tiny_cfg.patch_size ** 2 * 3) @ proj.weights[0].data \
        + proj.biases[0].data
    assert np.max(np.abs(tokens[0, 0, 0] - expect)) < 1e-12


def test_indivisible_image_rejected(tiny_cfg, model):
    images = np.zeros((1, 30, 30, 3), dtype=np.uint8)
    with pytest.raises(ValueError):
        tokenize_patches(images, tiny_cfg.patch_size, model.tokenizer.patch_proj)


def test_retokenize_bit_identical(tiny_cfg, model):
    images = make_images(tiny_cfg)
    cams = rig(tiny_cfg)
    a = tokenize_sensors(images, cams, model.bins, tiny_cfg.patch_size, model.tokenizer)
    b = tokenize_sensors(images, cams, model.bins, tiny_cfg.patch_size, model.tokenizer)
    assert np.array_equal(a.features.data, b.features.data)
    assert np.array_equal(a.pe.data, b.pe.data)


def test_sensor_pe_uses_patch_center_rays(tiny_cfg):
    cams = rig(tiny_cfg)
    bins = DepthBins(tiny_cfg.k_depth, tiny_cfg.d_min, tiny_cfg.range_xy)
    feats = camera_ray_features(cams[0], bins, tiny_cfg.patch_size)
    hp = tiny_cfg.image_size // tiny_cfg.patch_size
    assert feats.shape == (hp, hp, 3 * tiny_cfg.k_depth)
    # normalized by d_max: all coordinates within roughly [-sqrt2, sqrt2]
    assert np.max(np.abs(feats)) <= np.sqrt(2.0) + 1e-9


# -- canbus -----------------------------------------------------------------

def test_canbus_vector_layout():
    cb = CanbusState(speed=3.0, yaw_rate=0.1, steer=-0.2, throttle=0.5, brake=0.0)
    vec = cb.to_vector()
    assert vec.shape == (CanbusState.vector_size(),)
    assert CanbusState.vector_size() == 11  # 5 scalars + 6 command modes
    assert np.allclose(vec[:5], [3.0, 0.1, -0.2, 0.5, 0.0])
    assert vec[5:].sum() == 1.0


def test_canbus_rejects_bad_command():
    with pytest.raises(ValueError):
        CanbusState(command=np.array([0.5, 0.5, 0, 0, 0, 0.5]))
    with pytest.raises(ValueError):
        CanbusState(command=np.zeros(4))


# -- task queries -----------------------------------------------------------

def test_default_query_counts_full_scale():
    cfg = ModelConfig()
    assert cfg.n_agent == 900 and cfg.n_map == 100
    assert cfg.t_queue == 10 and cfg.k_keep == 50


def test_query_shapes(tiny_cfg, model):
    tq = init_task_queries(tiny_cfg, CanbusState(), model.tokenizer, seed=0)
    d = tiny_cfg.hidden
    assert tq.agent_h.shape == (tiny_cfg.n_agent, d)
    assert tq.agent_pe.shape == (tiny_cfg.n_agent, d)
    assert tq.agent_anchor.shape == (tiny_cfg.n_agent, 3)
    assert tq.map_h.shape == (tiny_cfg.n_map * tiny_cfg.n_point, d)
    assert tq.map_anchor.shape == (tiny_cfg.n_map, tiny_cfg.n_point, 2)
    assert tq.ego_h.shape == (1, d)
    assert tq.ego_anchor.shape == (tiny_cfg.plan_horizon, 2)


def test_ego_pe_starts_zero(tiny_cfg, model):
    tq = init_task_queries(tiny_cfg, CanbusState(), model.tokenizer, seed=0)
    assert np.array_equal(tq.ego_pe.data, np.zeros((1, tiny_cfg.hidden)))


def test_anchors_inside_perception_box(tiny_cfg, model):
    tq = init_task_queries(tiny_cfg, CanbusState(), model.tokenizer, seed=3)
    r = tiny_cfg.range_xy
    assert np.all(np.abs(tq.agent_anchor[:, :2]) <= r)
    assert np.all(tq.agent_anchor[:, 2] >= tiny_cfg.range_z_min)
    assert np.all(tq.agent_anchor[:, 2] <= tiny_cfg.range_z_max)
    assert np.all(np.abs(tq.map_anchor) <= r)


def test_same_seed_identical_anchors(tiny_cfg, model):
    a = init_task_queries(tiny_cfg, CanbusState(), model.tokenizer, seed=5)
    b = init_task_queries(tiny_cfg, CanbusState(), model.tokenizer, seed=5)
    assert np.array_equal(a.agent_anchor, b.agent_anchor)
    assert np.array_equal(a.map_anchor, b.map_anchor)
    c = init_task_queries(tiny_cfg, CanbusState(), model.tokenizer, seed=6)
    assert not np.array_equal(a.agent_anchor, c.agent_anchor)


def test_map_anchors_are_coherent_segments(tiny_cfg, model):
    tq = init_task_queries(tiny_cfg, CanbusState(), model.tokenizer, seed=0)
    for poly in tq.map_anchor:
        deltas = np.diff(poly, axis=0)
        # consecutive points evenly spaced along one direction (up to
        # clipping at the range boundary)
        lens = np.linalg.norm(deltas, axis=1)
        assert np.all(lens <= tiny_cfg.range_xy)


def test_ego_query_from_canbus(tiny_cfg, model):
    cb = CanbusState(speed=7.0)
    tq = init_task_queries(tiny_cfg, cb, model.tokenizer, seed=0)
    expect = mlp_forward(Tensor(cb.to_vector()[None, :]),
                         model.tokenizer.canbus_mlp).data
    assert np.array_equal(tq.ego_h.data, expect)


def test_invalid_counts_rejected(model):
    cfg = ModelConfig(n_agent=0)
    with pytest.raises(ValueError):
        init_task_queries(cfg, CanbusState(), model.tokenizer, seed=0)
