import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multicoin.controls import (
    AnchorSet,
    SplatConfig,
    depth_anchors,
    load_control_clip,
    render_control_clip,
    save_control_clip,
    splat_depth_disk,
    splat_flow_gaussian,
)
from multicoin.errors import (
    BadParams,
    EmptyInput,
    MissingDepthSample,
    NonPositiveDepth,
)
from multicoin.trajectory import Trajectory, TrajectorySet
from multicoin.visualize import DepthColorConfig, FlowColorConfig


def _static_set(width, height, frames, points, with_depth=False):
    """Trajectories that sit still; points = [(x, y, vec_or_depth), ...]."""
    ts = np.arange(frames)
    trajectories = []
    for i, (x, y, payload) in enumerate(points):
        xy = np.tile([x, y], (frames, 1)).astype(np.float64)
        if with_depth:
            trajectories.append(
                Trajectory(id=i, ts=ts.copy(), xy=xy,
                           depth=np.full(frames, payload, dtype=np.float64))
            )
        else:
            flow = np.tile(payload, (frames, 1)).astype(np.float64)
            trajectories.append(Trajectory(id=i, ts=ts.copy(), xy=xy, flow=flow))
    return TrajectorySet(width, height, frames, trajectories)


# ---------------------------------------------------------------------------
# dense per-pixel oracles


def _flow_splat_oracle(traj, t, cfg):
    pts = []
    for tr in sorted(traj.trajectories, key=lambda tr: tr.id):
        idx = tr.index_of(t)
        if idx is not None:
            pts.append((tr.xy[idx], np.asarray(tr.flow_at(t), dtype=np.float64)))
    h, w = traj.height, traj.width
    out = np.zeros((h, w, 2), dtype=np.float64)
    if pts:
        cutoff = (cfg.truncate * cfg.sigma) ** 2
        d2w = np.empty((h, w))
        winner = np.empty((h, w), dtype=int)
        for y in range(h):
            for x in range(w):
                best, bd = 0, None
                for k, (p, _) in enumerate(pts):
                    d2 = (x - p[0]) ** 2 + (y - p[1]) ** 2
                    if bd is None or d2 < bd:
                        best, bd = k, d2
                d2w[y, x] = bd
                winner[y, x] = best
        weight = np.where(d2w <= cutoff, np.exp(-d2w / (2.0 * cfg.sigma**2)), 0.0)
        for y in range(h):
            for x in range(w):
                out[y, x] = weight[y, x] * pts[winner[y, x]][1]
    return out.astype(np.float32)


def _depth_splat_oracle(traj, t, cfg, anchors):
    pts = []
    for tr in sorted(traj.trajectories, key=lambda tr: tr.id):
        idx = tr.index_of(t)
        if idx is not None and tr.depth is not None:
            pts.append((tr.xy[idx], float(tr.depth[idx])))
    if anchors is not None:
        pts += [(np.asarray([x, y], dtype=np.float64), float(d))
                for x, y, d in anchors.anchors]
    h, w = traj.height, traj.width
    values = np.zeros((h, w), dtype=np.float64)
    valid = np.zeros((h, w), dtype=bool)
    r2 = float(cfg.disk_radius) ** 2
    for y in range(h):
        for x in range(w):
            best_d, bd = None, None
            for p, d in pts:
                d2 = (x - p[0]) ** 2 + (y - p[1]) ** 2
                if d2 <= r2 and (bd is None or d2 < bd):
                    best_d, bd = d, d2
            if best_d is not None:
                values[y, x] = best_d
                valid[y, x] = True
    return values.astype(np.float32), valid


def test_flow_splat_matches_brute_force():
    cases = [
        [(32.0, 32.0, (3.0, -1.0))],
        [(10.5, 20.25, (1.0, 2.0)), (40.0, 40.0, (-2.0, 0.5))],
        [(8.0, 8.0, (1.0, 0.0)), (8.0, 40.0, (0.0, 1.0)),
         (40.0, 8.0, (-1.0, 0.0)), (40.0, 40.0, (0.0, -1.0)),
         (24.0, 24.0, (2.0, 2.0))],
    ]
    for points in cases:
        traj = _static_set(64, 64, 2, points)
        for cfg in (SplatConfig(), SplatConfig(sigma=4.0, truncate=2.0)):
            got = splat_flow_gaussian(traj, 0, cfg)
            want = _flow_splat_oracle(traj, 0, cfg)
            np.testing.assert_array_equal(got.vectors, want)


def test_flow_splat_weight_profile():
    traj = _static_set(32, 32, 2, [(10.0, 10.0, (2.0, 0.0))])
    cfg = SplatConfig(sigma=4.0, truncate=3.0)
    field = splat_flow_gaussian(traj, 0, cfg).vectors
    np.testing.assert_array_equal(field[10, 10], [2.0, 0.0])
    assert field[10, 14, 0] == pytest.approx(2.0 * np.exp(-0.5), rel=1e-6)
    # cutoff at truncate * sigma = 12 px is inclusive
    assert field[10, 22, 0] > 0
    assert field[10, 23, 0] == 0.0
    assert field[23, 10, 1] == 0.0


def test_flow_splat_tie_goes_to_lower_id():
    traj = _static_set(32, 32, 2, [(10.0, 10.0, (1.0, 0.0)),
                                   (14.0, 10.0, (0.0, 1.0))])
    field = splat_flow_gaussian(traj, 0).vectors
    # (12, 10) is exactly 2 px from both points
    w = np.exp(-4.0 / 200.0)
    assert field[10, 12, 0] == pytest.approx(w, rel=1e-6)
    assert field[10, 12, 1] == 0.0


def test_flow_splat_uncovered_frame_is_zero():
    tr = Trajectory(id=0, ts=np.asarray([0, 1]),
                    xy=np.asarray([[4.0, 4.0], [5.0, 4.0]]))
    traj = TrajectorySet(16, 16, 6, [tr])
    field = splat_flow_gaussian(traj, 5)
    np.testing.assert_array_equal(field.vectors, 0.0)


def test_depth_splat_matches_brute_force():
    anchors = depth_anchors([2.0, 4.0], 64, 64, inset=10.0)
    cases = [
        ([(32.0, 32.0, 3.0)], None),
        ([(20.0, 20.0, 1.5), (28.0, 20.0, 6.0)], None),
        ([(12.25, 50.0, 2.0), (50.0, 12.0, 8.0), (32.0, 32.0, 4.0)], anchors),
        ([], anchors),
    ]
    for points, anc in cases:
        traj = _static_set(64, 64, 2, points, with_depth=True)
        for cfg in (SplatConfig(), SplatConfig(disk_radius=6.0)):
            depth, mask = splat_depth_disk(traj, 0, cfg, anc)
            want_v, want_m = _depth_splat_oracle(traj, 0, cfg, anc)
            np.testing.assert_array_equal(depth.values, want_v)
            np.testing.assert_array_equal(mask.bits, want_m)


def test_depth_splat_copies_verbatim_inside_disk():
    traj = _static_set(32, 32, 2, [(16.0, 16.0, 5.25)], with_depth=True)
    depth, mask = splat_depth_disk(traj, 0, SplatConfig(disk_radius=10.0))
    assert mask.bits[16, 26] and not mask.bits[16, 27]   # radius inclusive
    assert mask.bits[16, 6] and not mask.bits[16, 5]
    covered = depth.values[mask.bits]
    np.testing.assert_array_equal(covered, np.full(covered.shape, 5.25, np.float32))
    np.testing.assert_array_equal(depth.values[~mask.bits], 0.0)


def test_depth_splat_tie_order():
    # pixel (16, 10) is 6 px from both trajectory points: id 0 wins
    traj = _static_set(32, 32, 2, [(10.0, 10.0, 2.0), (22.0, 10.0, 3.0)],
                       with_depth=True)
    depth, _ = splat_depth_disk(traj, 0, SplatConfig(disk_radius=8.0))
    assert depth.values[10, 16] == 2.0

    # anchors lose equidistant ties against trajectory points
    anchors = AnchorSet(anchors=[(22.0, 10.0, 9.0)], mu=9.0)
    traj1 = _static_set(32, 32, 2, [(10.0, 10.0, 2.0)], with_depth=True)
    depth, _ = splat_depth_disk(traj1, 0, SplatConfig(disk_radius=8.0), anchors)
    assert depth.values[10, 16] == 2.0


def test_depth_splat_missing_samples():
    traj = _static_set(16, 16, 2, [(8.0, 8.0, (1.0, 0.0))], with_depth=False)
    with pytest.raises(MissingDepthSample):
        splat_depth_disk(traj, 0)
    # anchors alone are fine
    anchors = AnchorSet(anchors=[(8.0, 8.0, 4.0)], mu=4.0)
    depth, mask = splat_depth_disk(traj, 0, SplatConfig(disk_radius=2.0), anchors)
    assert depth.values[8, 8] == 4.0
    # an empty trajectory set renders an all-invalid frame
    empty = TrajectorySet(16, 16, 2, [])
    _, mask = splat_depth_disk(empty, 0)
    assert not mask.bits.any()


# ---------------------------------------------------------------------------
# depth anchors


def test_anchor_values_and_positions():
    anc = depth_anchors([2.0, 4.0, 6.0], 64, 48, inset=10.0)
    assert anc.mu == 4.0
    xs = [a[0] for a in anc.anchors]
    ys = [a[1] for a in anc.anchors]
    ds = [a[2] for a in anc.anchors]
    assert xs == [10.0, 10.0, 10.0, 53.0, 53.0, 53.0]
    assert ys == [10.0, 24.0, 37.0, 10.0, 24.0, 37.0]
    assert ds == [1.0, 4.0 / 3.0, 2.0, 8.0, 12.0, 16.0]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0.01, 1000.0), min_size=1, max_size=12))
def test_anchor_depth_law(samples):
    anc = depth_anchors(samples, 256, 256, inset=10.0)
    mu = sum(samples) / len(samples)
    assert anc.mu == mu
    assert [a[2] for a in anc.anchors] == [mu / 4, mu / 3, mu / 2,
                                           2 * mu, 3 * mu, 4 * mu]
    # three below the reference on the left edge, three above on the right
    assert all(a[2] < mu and a[0] == 10.0 for a in anc.anchors[:3])
    assert all(a[2] > mu and a[0] == 245.0 for a in anc.anchors[3:])


def test_anchor_input_validation():
    with pytest.raises(EmptyInput):
        depth_anchors([], 64, 64)
    for bad in ([0.0], [-1.0], [float("nan")], [2.0, float("inf")]):
        with pytest.raises(NonPositiveDepth):
            depth_anchors(bad, 64, 64)
    with pytest.raises(BadParams):
        depth_anchors([1.0], 20, 64, inset=10.0)
    with pytest.raises(BadParams):
        depth_anchors([1.0], 64, 20, inset=10.0)


def test_splat_config_validation():
    with pytest.raises(BadParams):
        SplatConfig(sigma=0.0)
    with pytest.raises(BadParams):
        SplatConfig(disk_radius=0.5)
    with pytest.raises(BadParams):
        SplatConfig(truncate=0.9)


# ---------------------------------------------------------------------------
# clip rendering


def test_render_derives_depth_cfg_from_anchors():
    traj = _static_set(64, 64, 3, [(32.0, 32.0, 2.0)], with_depth=True)
    anchors = depth_anchors([2.0], 64, 64, inset=10.0)
    clip = render_control_clip(traj, 3, anchors=anchors)
    assert clip.depth_cfg.d_ref == 2.0
    assert clip.depth_cfg.d_scale == 6.0
    assert len(clip.flow_frames) == 3 and len(clip.depth_frames) == 3


def test_render_derives_depth_cfg_from_samples():
    traj = _static_set(64, 64, 2, [(20.0, 20.0, 2.0), (40.0, 40.0, 6.0)],
                       with_depth=True)
    clip = render_control_clip(traj, 2)
    assert clip.depth_cfg.d_ref == 4.0
    assert clip.depth_cfg.d_scale == 12.0


def test_render_without_depth_is_black():
    traj = _static_set(32, 32, 2, [(16.0, 16.0, (2.0, 0.0))])
    clip = render_control_clip(traj, 2)
    assert clip.depth_cfg is None
    for img in clip.depth_frames:
        np.testing.assert_array_equal(img.rgb, 0)
    # flow frames still carry the splat
    assert clip.flow_frames[0].rgb.any()


def test_render_explicit_cfg_kept():
    traj = _static_set(32, 32, 2, [(16.0, 16.0, 3.0)], with_depth=True)
    cfg = DepthColorConfig(d_ref=5.0, d_scale=10.0)
    clip = render_control_clip(traj, 2, depth_cfg=cfg)
    assert clip.depth_cfg is cfg


def test_render_rejects_bad_frame_count():
    traj = _static_set(16, 16, 2, [(8.0, 8.0, (1.0, 0.0))])
    with pytest.raises(BadParams):
        render_control_clip(traj, 0)


def test_save_load_round_trip(tmp_path):
    traj = _static_set(48, 48, 2, [(24.0, 24.0, 3.0), (10.0, 30.0, 1.0)],
                       with_depth=True)
    anchors = depth_anchors([3.0, 1.0], 48, 48, inset=10.0)
    clip = render_control_clip(traj, 2, anchors=anchors,
                               splat_cfg=SplatConfig(sigma=6.0, disk_radius=5.0))
    save_control_clip(clip, tmp_path)
    back = load_control_clip(tmp_path)
    assert back.flow_cfg.mag_max == clip.flow_cfg.mag_max
    assert back.depth_cfg.d_ref == clip.depth_cfg.d_ref
    assert back.splat_cfg.sigma == 6.0
    assert back.splat_cfg.disk_radius == 5.0
    for a, b in zip(clip.flow_frames + clip.depth_frames,
                    back.flow_frames + back.depth_frames):
        np.testing.assert_array_equal(a.rgb, b.rgb)


def test_thread_pool_parity(monkeypatch):
    traj = _static_set(48, 48, 4, [(24.0, 24.0, 3.0), (36.0, 12.0, 5.0)],
                       with_depth=True)
    anchors = depth_anchors([3.0, 5.0], 48, 48, inset=10.0)
    serial = render_control_clip(traj, 4, anchors=anchors)
    monkeypatch.setenv("MULTICOIN_THREADS", "2")
    threaded = render_control_clip(traj, 4, anchors=anchors)
    for a, b in zip(serial.flow_frames + serial.depth_frames,
                    threaded.flow_frames + threaded.depth_frames):
        np.testing.assert_array_equal(a.rgb, b.rgb)


def test_flow_color_config_round_trip_through_render():
    traj = _static_set(32, 32, 2, [(16.0, 16.0, (4.0, 0.0))])
    clip = render_control_clip(traj, 1, flow_cfg=FlowColorConfig(mag_max=8.0))
    assert clip.flow_cfg.mag_max == 8.0
    assert len(clip.flow_frames) == 1
