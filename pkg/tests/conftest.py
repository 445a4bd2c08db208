"""Shared fixtures: tiny model configurations and synthetic inputs sized
for fast unit tests."""
import numpy as np
import pytest

from dtx.config import ModelConfig, WorldConfig


@pytest.fixture
def tiny_cfg():
    """Smallest config that exercises every code path."""
    return ModelConfig(
        num_layers=2, hidden=32, heads=2,
        n_agent=6, n_map=2, n_point=4,
        t_queue=3, k_keep=4,
        n_cameras=2, image_size=32, patch_size=16, k_depth=4,
        num_freqs=2,
    )


@pytest.fixture
def tiny_world():
    return WorldConfig(episode_len=6, image_size=32)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_images(cfg, seed=0):
    r = np.random.default_rng(seed)
    return r.integers(0, 256, (cfg.n_cameras, cfg.image_size,
                               cfg.image_size, 3), dtype=np.uint8)
