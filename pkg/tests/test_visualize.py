import colorsys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multicoin.errors import AmbiguousColor, BadParams
from multicoin.media_io import DepthMap, FlowField, Frame, Mask
from multicoin.visualize import (
    DepthColorConfig,
    FlowColorConfig,
    depth_cfg_from_values,
    depth_to_rgb,
    flow_to_rgb,
    rgb_to_depth,
    rgb_to_flow,
)


def _colorsys_flow_pixel(u, v, mag_max):
    """Reference encoding of one vector via the stdlib HSV converter."""
    mag = np.hypot(u, v)
    hue = np.degrees(np.arctan2(v, u)) % 360.0
    value = min(mag / mag_max, 1.0)
    r, g, b = colorsys.hsv_to_rgb(hue / 360.0, 1.0, value)
    return np.rint(np.asarray([r, g, b]) * 255.0)


def test_flow_encoding_matches_colorsys_oracle(rng):
    vecs = rng.uniform(-25, 25, size=(6, 6, 2)).astype(np.float32)
    frame = flow_to_rgb(FlowField(vecs))
    for y in range(6):
        for x in range(6):
            expected = _colorsys_flow_pixel(
                float(vecs[y, x, 0]), float(vecs[y, x, 1]), 20.0
            )
            got = frame.rgb[y, x].astype(np.float64)
            assert np.max(np.abs(got - expected)) <= 1.0, (x, y, got, expected)


def test_zero_flow_is_black():
    frame = flow_to_rgb(FlowField(np.zeros((3, 3, 2), dtype=np.float32)))
    assert np.all(frame.rgb == 0)


def test_black_decodes_to_zero_flow():
    flow = rgb_to_flow(Frame(np.zeros((3, 3, 3), dtype=np.uint8)))
    assert np.all(flow.vectors == 0)


def test_cardinal_directions():
    # hues 0/90/180/270 at full saturation and value, worked out by hand
    vecs = np.asarray([[[20.0, 0.0], [0.0, 20.0], [-20.0, 0.0], [0.0, -20.0]]])
    frame = flow_to_rgb(FlowField(vecs.astype(np.float32)))
    np.testing.assert_array_equal(frame.rgb[0, 0], [255, 0, 0])
    np.testing.assert_array_equal(frame.rgb[0, 1], [128, 255, 0])
    np.testing.assert_array_equal(frame.rgb[0, 2], [0, 255, 255])
    np.testing.assert_array_equal(frame.rgb[0, 3], [128, 0, 255])


def test_magnitude_saturates_at_mag_max():
    a = flow_to_rgb(FlowField(np.full((1, 1, 2), 100.0, dtype=np.float32)))
    b = flow_to_rgb(FlowField(np.full((1, 1, 2), 1000.0, dtype=np.float32)))
    np.testing.assert_array_equal(a.rgb, b.rgb)
    back = rgb_to_flow(a)
    assert np.hypot(*back.vectors[0, 0]) <= 20.0 + 1e-6


def test_flow_round_trip_half_pixel(rng):
    for _ in range(25):
        mag = rng.uniform(0, 20, size=(8, 8))
        ang = rng.uniform(0, 2 * np.pi, size=(8, 8))
        vecs = np.stack([mag * np.cos(ang), mag * np.sin(ang)], axis=2)
        flow = FlowField(vecs.astype(np.float32))
        back = rgb_to_flow(flow_to_rgb(flow))
        err = np.max(np.abs(back.vectors.astype(np.float64) - vecs))
        assert err <= 0.5, err


def test_flow_cfg_validation():
    with pytest.raises(BadParams):
        FlowColorConfig(mag_max=0.0)
    with pytest.raises(BadParams):
        FlowColorConfig(mag_max=-3.0)


# ---------------------------------------------------------------------------
# depth ramp


CFG = DepthColorConfig(d_ref=4.0, d_scale=2.0)


def test_ramp_key_colors():
    depth = DepthMap(np.asarray([[2.0, 3.0, 4.0, 5.0, 6.0]], dtype=np.float32))
    frame = depth_to_rgb(depth, CFG)
    np.testing.assert_array_equal(frame.rgb[0, 0], [255, 0, 0])       # s=-1 red
    np.testing.assert_array_equal(frame.rgb[0, 1], [255, 128, 128])   # s=-0.5
    np.testing.assert_array_equal(frame.rgb[0, 2], [255, 255, 255])   # s=0 white
    np.testing.assert_array_equal(frame.rgb[0, 3], [128, 128, 255])   # s=+0.5
    np.testing.assert_array_equal(frame.rgb[0, 4], [0, 0, 255])       # s=+1 blue


def test_ramp_clamps_out_of_range():
    depth = DepthMap(np.asarray([[0.0, 100.0]], dtype=np.float32))
    frame = depth_to_rgb(depth, CFG)
    np.testing.assert_array_equal(frame.rgb[0, 0], [255, 0, 0])
    np.testing.assert_array_equal(frame.rgb[0, 1], [0, 0, 255])


def test_invalid_pixels_render_black():
    depth = DepthMap(np.full((2, 2), 4.0, dtype=np.float32))
    valid = Mask(np.asarray([[True, False], [False, True]]))
    frame = depth_to_rgb(depth, CFG, valid)
    np.testing.assert_array_equal(frame.rgb[0, 1], [0, 0, 0])
    np.testing.assert_array_equal(frame.rgb[1, 0], [0, 0, 0])
    np.testing.assert_array_equal(frame.rgb[0, 0], [255, 255, 255])


def test_depth_round_trip_within_quantization(rng):
    for _ in range(25):
        vals = rng.uniform(CFG.d_ref - CFG.d_scale, CFG.d_ref + CFG.d_scale, (8, 8))
        depth = DepthMap(vals.astype(np.float32))
        frame = depth_to_rgb(depth, CFG)
        back, valid = rgb_to_depth(frame, CFG)
        assert np.all(valid.bits)
        err = np.max(np.abs(back.values.astype(np.float64) - vals))
        assert err <= CFG.d_scale * 2.0 / 255.0, err


def test_black_comes_back_invalid():
    frame = Frame(np.zeros((2, 2, 3), dtype=np.uint8))
    depth, valid = rgb_to_depth(frame, CFG)
    assert not valid.bits.any()
    assert np.all(depth.values == 0)


def test_off_ramp_color_rejected_with_position():
    rgb = np.full((2, 3, 3), 255, dtype=np.uint8)
    rgb[1, 2] = (0, 255, 0)
    with pytest.raises(AmbiguousColor) as err:
        rgb_to_depth(Frame(rgb), CFG)
    assert "(2,1)" in str(err.value)


def test_near_white_prefers_larger_deviation():
    # encode a slightly-red white: on both ramp halves within tolerance
    frame = Frame(np.asarray([[[255, 250, 250]]], dtype=np.uint8))
    depth, valid = rgb_to_depth(frame, CFG)
    s = (250 + 250) / 510.0 - 1.0
    assert depth.values[0, 0] == pytest.approx(CFG.d_ref + s * CFG.d_scale, abs=1e-6)


def test_depth_cfg_policy():
    cfg = depth_cfg_from_values([2.0, 4.0, 6.0])
    assert cfg.d_ref == 4.0
    assert cfg.d_scale == 12.0
    with pytest.raises(BadParams):
        depth_cfg_from_values([])
    with pytest.raises(BadParams):
        depth_cfg_from_values([-1.0, 1.0])


def test_depth_cfg_validation():
    with pytest.raises(BadParams):
        DepthColorConfig(d_ref=float("nan"), d_scale=1.0)
    with pytest.raises(BadParams):
        DepthColorConfig(d_ref=1.0, d_scale=0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_flow_round_trip_property(seed):
    r = np.random.default_rng(seed)
    mag = r.uniform(0, 20, size=(4, 4))
    ang = r.uniform(0, 2 * np.pi, size=(4, 4))
    vecs = np.stack([mag * np.cos(ang), mag * np.sin(ang)], axis=2)
    back = rgb_to_flow(flow_to_rgb(FlowField(vecs.astype(np.float32))))
    assert np.max(np.abs(back.vectors.astype(np.float64) - vecs)) <= 0.5
