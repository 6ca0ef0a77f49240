import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multicoin.errors import (
    DimensionMismatch,
    EmptyInput,
    EmptyPolyline,
    LengthMismatch,
    NonFiniteValue,
    TooSmall,
)
from multicoin.media_io import FlowField, Frame, luma_bt601, make_synthetic
from multicoin.metrics import (
    SSIM_K1,
    SSIM_K2,
    SSIM_RANGE,
    SSIM_SIGMA,
    SSIM_WINDOW,
    Polyline,
    frechet_distance,
    motion_metric,
    ssim,
    ssim_sequence,
)
from multicoin.trajectory import select_seeds, track_points


# ---------------------------------------------------------------------------
# coupling-enumeration oracle: minimize the worst pair distance over every
# monotone index coupling, found by exhaustive path enumeration


@lru_cache(maxsize=None)
def _coupling_groups(n, m):
    """Flat dmat indices of all monotone couplings, grouped by path length."""
    paths = []

    def walk(i, j, acc):
        acc = acc + [i * m + j]
        if i == n - 1 and j == m - 1:
            paths.append(acc)
            return
        if i + 1 < n:
            walk(i + 1, j, acc)
        if j + 1 < m:
            walk(i, j + 1, acc)
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc)

    walk(0, 0, [])
    groups = {}
    for p in paths:
        groups.setdefault(len(p), []).append(p)
    return [np.asarray(g, dtype=np.intp) for g in groups.values()]


def coupling_frechet(a, b):
    """Brute-force discrete Frechet distance by coupling enumeration."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    flat = np.sqrt((diff * diff).sum(axis=2)).ravel()
    best = np.inf
    for idx in _coupling_groups(len(a), len(b)):
        best = min(best, float(flat[idx].max(axis=1).min()))
    return best


def test_frechet_identity_is_zero(rng):
    pts = rng.uniform(-5, 5, size=(6, 2))
    assert frechet_distance(Polyline(pts), Polyline(pts.copy())) == 0.0


def test_frechet_single_points():
    assert frechet_distance(Polyline([[0.0, 0.0]]), Polyline([[3.0, 4.0]])) == 5.0


def test_frechet_hand_case():
    p = Polyline([[0.0, 0.0], [4.0, 0.0]])
    q = Polyline([[0.0, 3.0], [4.0, 3.0]])
    assert frechet_distance(p, q) == 3.0
    # a detour point must couple to one of the straight path's endpoints
    detour = Polyline([[0.0, 0.0], [2.0, 5.0], [4.0, 0.0]])
    straight = Polyline([[0.0, 0.0], [4.0, 0.0]])
    assert frechet_distance(detour, straight) == math.sqrt(29.0)


def test_frechet_matches_coupling_oracle(rng):
    for _ in range(300):
        n, m = rng.integers(1, 7, size=2)
        a = rng.uniform(-10, 10, size=(n, 2))
        b = rng.uniform(-10, 10, size=(m, 2))
        got = frechet_distance(Polyline(a), Polyline(b))
        assert abs(got - coupling_frechet(a, b)) <= 1e-9


def test_frechet_symmetry(rng):
    for _ in range(50):
        a = rng.uniform(-10, 10, size=(rng.integers(1, 7), 2))
        b = rng.uniform(-10, 10, size=(rng.integers(1, 7), 2))
        assert frechet_distance(Polyline(a), Polyline(b)) == frechet_distance(
            Polyline(b), Polyline(a)
        )


def test_frechet_endpoint_lower_bound(rng):
    for _ in range(50):
        a = rng.uniform(-10, 10, size=(rng.integers(1, 7), 2))
        b = rng.uniform(-10, 10, size=(rng.integers(1, 7), 2))
        d = frechet_distance(Polyline(a), Polyline(b))
        assert d >= np.hypot(*(a[0] - b[0])) - 1e-12
        assert d >= np.hypot(*(a[-1] - b[-1])) - 1e-12


def test_frechet_translation_invariant(rng):
    a = rng.uniform(-10, 10, size=(5, 2))
    b = rng.uniform(-10, 10, size=(4, 2))
    base = frechet_distance(Polyline(a), Polyline(b))
    shift = np.asarray([13.0, -7.0])
    moved = frechet_distance(Polyline(a + shift), Polyline(b + shift))
    assert moved == pytest.approx(base, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=6),
    st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=6),
)
def test_frechet_oracle_property(pa, pb):
    a = np.asarray(pa, dtype=np.float64)
    b = np.asarray(pb, dtype=np.float64)
    got = frechet_distance(Polyline(a), Polyline(b))
    assert abs(got - coupling_frechet(a, b)) <= 1e-9


def test_polyline_validation():
    with pytest.raises(EmptyPolyline):
        Polyline(np.empty((0, 2)))
    with pytest.raises(EmptyPolyline):
        Polyline(np.zeros((3, 3)))
    with pytest.raises(NonFiniteValue):
        Polyline([[0.0, float("nan")]])


# ---------------------------------------------------------------------------
# motion metric


def test_motion_zero_law_uniform(uniform_clip):
    flows, _, _ = uniform_clip
    traj = track_points(flows, [(8.0, 8.0), (3.0, 5.0)])
    report = motion_metric(traj, flows)
    assert report.mean == 0.0
    assert all(score == 0.0 for _, score in report.per_trajectory)


def test_motion_zero_law_rotation(rotation_clip):
    flows, _, _ = rotation_clip
    seeds = select_seeds(flows[0], 4, min_sep=3.0)
    traj = track_points(flows, [(float(x), float(y)) for x, y in seeds])
    report = motion_metric(traj, flows)
    assert report.mean == 0.0


def test_motion_perpendicular_drift_scores_diagonal():
    right, _, _ = make_synthetic("uniform", 32, 32, 4, u=1.0, v=0.0)
    down, _, _ = make_synthetic("uniform", 32, 32, 4, u=0.0, v=1.0)
    traj = track_points(right, [(8.0, 8.0)])
    report = motion_metric(traj, down)
    assert report.mean == pytest.approx(math.sqrt(32.0), abs=1e-12)


def test_motion_frozen_generator_scores_path_length(uniform_clip):
    flows, _, _ = uniform_clip
    traj = track_points(flows, [(8.0, 8.0)])
    still = [FlowField(np.zeros((16, 16, 2), dtype=np.float32)) for _ in flows]
    report = motion_metric(traj, still)
    assert report.mean == 4.0


def test_motion_report_schema(uniform_clip):
    flows, _, _ = uniform_clip
    traj = track_points(flows, [(8.0, 8.0), (2.0, 2.0)])
    obj = motion_metric(traj, flows).to_json_obj()
    assert set(obj) == {"per_trajectory", "mean_frechet"}
    assert obj["per_trajectory"] == [
        {"id": 0, "frechet": 0.0},
        {"id": 1, "frechet": 0.0},
    ]
    assert obj["mean_frechet"] == 0.0


def test_motion_metric_errors(uniform_clip):
    flows, _, _ = uniform_clip
    traj = track_points(flows, [(8.0, 8.0)])
    from multicoin.trajectory import TrajectorySet

    with pytest.raises(EmptyInput):
        motion_metric(TrajectorySet(16, 16, 5, []), flows)
    with pytest.raises(DimensionMismatch):
        motion_metric(traj, flows[:2])
    wrong = [FlowField(np.zeros((8, 8, 2), dtype=np.float32)) for _ in flows]
    with pytest.raises(DimensionMismatch):
        motion_metric(traj, wrong)


# ---------------------------------------------------------------------------
# SSIM


def _ssim_oracle(a, b):
    """Direct per-center windowed evaluation, no separable shortcuts."""
    x = luma_bt601(a)
    y = luma_bt601(b)
    half = (SSIM_WINDOW - 1) / 2.0
    xs = np.arange(SSIM_WINDOW) - half
    taps = np.exp(-(xs * xs) / (2.0 * SSIM_SIGMA**2))
    taps /= taps.sum()
    w2 = np.outer(taps, taps)
    c1 = (SSIM_K1 * SSIM_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_RANGE) ** 2
    r = SSIM_WINDOW // 2
    h, w = x.shape
    vals = []
    for cy in range(r, h - r):
        for cx in range(r, w - r):
            px = x[cy - r : cy + r + 1, cx - r : cx + r + 1]
            py = y[cy - r : cy + r + 1, cx - r : cx + r + 1]
            mx = (w2 * px).sum()
            my = (w2 * py).sum()
            vx = (w2 * px * px).sum() - mx * mx
            vy = (w2 * py * py).sum() - my * my
            cov = (w2 * px * py).sum() - mx * my
            vals.append(
                ((2 * mx * my + c1) * (2 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2))
            )
    return float(np.mean(vals))


def test_ssim_identity_is_one(rng):
    a = Frame(rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8))
    assert ssim(a, Frame(a.rgb.copy())) == 1.0


def test_ssim_constant_frames_closed_form():
    a = Frame(np.full((16, 16, 3), 96, dtype=np.uint8))
    b = Frame(np.full((16, 16, 3), 128, dtype=np.uint8))
    c1 = (SSIM_K1 * SSIM_RANGE) ** 2
    want = (2 * 96.0 * 128.0 + c1) / (96.0**2 + 128.0**2 + c1)
    assert ssim(a, b) == pytest.approx(want, rel=1e-9)


def test_ssim_matches_windowed_oracle(rng):
    for _ in range(3):
        a = Frame(rng.integers(0, 256, size=(16, 20, 3), dtype=np.uint8))
        b = Frame(rng.integers(0, 256, size=(16, 20, 3), dtype=np.uint8))
        assert ssim(a, b) == pytest.approx(_ssim_oracle(a, b), abs=1e-9)


def test_ssim_symmetry(rng):
    a = Frame(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8))
    b = Frame(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8))
    assert ssim(a, b) == ssim(b, a)


def test_ssim_degrades_with_noise(rng):
    base = rng.integers(60, 196, size=(24, 24, 3))
    a = Frame(base.astype(np.uint8))
    small = Frame(np.clip(base + rng.integers(-10, 11, base.shape), 0, 255).astype(np.uint8))
    large = Frame(np.clip(base + rng.integers(-80, 81, base.shape), 0, 255).astype(np.uint8))
    s_small = ssim(a, small)
    s_large = ssim(a, large)
    assert 0.0 < s_large < s_small < 1.0


def test_ssim_input_validation(rng):
    a = Frame(rng.integers(0, 256, size=(10, 16, 3), dtype=np.uint8))
    b = Frame(rng.integers(0, 256, size=(10, 16, 3), dtype=np.uint8))
    with pytest.raises(TooSmall):
        ssim(a, b)
    big = Frame(rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8))
    with pytest.raises(DimensionMismatch):
        ssim(big, b)


def test_ssim_sequence_values(rng):
    frames_a = [
        Frame(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8)) for _ in range(3)
    ]
    frames_b = [Frame(f.rgb.copy()) for f in frames_a]
    values, mean = ssim_sequence(frames_a, frames_b)
    assert values == [1.0, 1.0, 1.0]
    assert mean == 1.0
    per = [ssim(x, y) for x, y in zip(frames_a, frames_a)]
    assert per == values


def test_ssim_sequence_errors(rng):
    a = [Frame(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8))]
    with pytest.raises(LengthMismatch):
        ssim_sequence(a, [])
    with pytest.raises(EmptyInput):
        ssim_sequence([], [])
