import numpy as np
import pytest

from multicoin.media_io import DepthMap, FlowField, Frame, Mask, make_synthetic


@pytest.fixture
def uniform_clip():
    """4 transitions of (1, 0) flow on a 16x16 textured clip."""
    return make_synthetic("uniform", 16, 16, 4, u=1.0, v=0.0, seed=7)


@pytest.fixture
def rotation_clip():
    return make_synthetic("rotation", 16, 16, 4, omega=0.1)


@pytest.fixture
def square_clip():
    """8x8 square moving (1, 0) from (2, 2) on a 32x32 canvas, 4 steps."""
    return make_synthetic(
        "moving_square", 32, 32, 4, size=8, velocity=(1.0, 0.0), start=(2.0, 2.0), seed=3
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_flow(rng, h=8, w=8, scale=5.0):
    return FlowField(rng.uniform(-scale, scale, size=(h, w, 2)).astype(np.float32))


def random_depth(rng, h=8, w=8, lo=0.5, hi=10.0):
    return DepthMap(rng.uniform(lo, hi, size=(h, w)).astype(np.float32))


def random_frame(rng, h=8, w=8):
    return Frame(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


def random_mask(rng, h=8, w=8):
    return Mask(rng.random(size=(h, w)) < 0.5)
