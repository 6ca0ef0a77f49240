"""Motion-adherence and image-quality metrics.

Motion adherence re-tracks each input trajectory's seed through the
generated flow fields and scores the discrete Frechet distance between the
input path and the re-tracked path. Image quality is windowed SSIM on
BT.601 luma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import (
    DimensionMismatch,
    EmptyInput,
    EmptyPolyline,
    LengthMismatch,
    NonFiniteValue,
    TooSmall,
)
from .media_io import FlowField, Frame, luma_bt601
from .trajectory import TrajectorySet, track_points

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_RANGE = 255.0


@dataclass
class Polyline:
    """An ordered sub-pixel point path."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise EmptyPolyline(f"expected (N, 2) points, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise EmptyPolyline("polyline needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteValue("polyline contains non-finite coordinates")
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]


def frechet_distance(p: Polyline, q: Polyline) -> float:
    """Discrete Frechet distance between two polylines.

    Standard dynamic program over the coupling lattice with Euclidean
    ground distance: c(i,j) = max(d_ij, min(c(i-1,j), c(i-1,j-1), c(i,j-1))).
    """
    a, b = p.points, q.points
    n, m = len(a), len(b)
    diff = a[:, None, :] - b[None, :, :]
    dmat = np.sqrt((diff * diff).sum(axis=2))
    row = np.empty(m, dtype=np.float64)
    row[0] = dmat[0, 0]
    for j in range(1, m):
        row[j] = max(row[j - 1], dmat[0, j])
    for i in range(1, n):
        prev_diag = row[0]
        row[0] = max(row[0], dmat[i, 0])
        for j in range(1, m):
            best = min(row[j], prev_diag, row[j - 1])
            prev_diag = row[j]
            row[j] = max(best, dmat[i, j])
    return float(row[m - 1])


@dataclass
class MotionReport:
    per_trajectory: list[tuple[int, float]]
    mean: float

    def to_json_obj(self) -> dict:
        return {
            "per_trajectory": [
                {"id": tid, "frechet": score} for tid, score in self.per_trajectory
            ],
            "mean_frechet": self.mean,
        }


def motion_metric(traj_set: TrajectorySet, generated_flows: list[FlowField]) -> MotionReport:
    """Frechet distance between input paths and re-tracked paths.

    Each trajectory's first point seeds advection through the generated
    flows; a perfect generator reproduces the input path exactly and
    scores 0.
    """
    if not traj_set.trajectories:
        raise EmptyInput("no trajectories to score")
    if len(generated_flows) != traj_set.frame_count - 1:
        raise DimensionMismatch(
            f"{len(generated_flows)} flow fields for {traj_set.frame_count} frames"
        )
    for f in generated_flows:
        if (f.width, f.height) != (traj_set.width, traj_set.height):
            raise DimensionMismatch(
                f"flow field {f.width}x{f.height} does not match the "
                f"{traj_set.width}x{traj_set.height} trajectory canvas"
            )
    seeds = [(float(tr.xy[0, 0]), float(tr.xy[0, 1])) for tr in traj_set.trajectories]
    retracked = track_points(generated_flows, seeds)
    per = []
    for tr, rt in zip(traj_set.trajectories, retracked.trajectories):
        score = frechet_distance(Polyline(tr.xy), Polyline(rt.xy))
        per.append((tr.id, score))
    mean = sum(s for _, s in per) / len(per)
    return MotionReport(per_trajectory=per, mean=mean)


def _gaussian_taps(window: int, sigma: float) -> np.ndarray:
    half = (window - 1) / 2.0
    xs = np.arange(window, dtype=np.float64) - half
    taps = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def _windowed_mean(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    out = correlate1d(img, taps, axis=0, mode="constant", cval=0.0)
    out = correlate1d(out, taps, axis=1, mode="constant", cval=0.0)
    r = (len(taps) - 1) // 2
    return out[r:-r, r:-r]


def ssim(a: Frame, b: Frame) -> float:
    """Mean structural similarity over valid window centers.

    Frames convert to BT.601 luma and are compared with an 11x11 Gaussian
    window (sigma 1.5), K1=0.01, K2=0.03, dynamic range 255. Windows that
    would read outside the frame are skipped, so inputs must be at least
    11x11.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if a.width < SSIM_WINDOW or a.height < SSIM_WINDOW:
        raise TooSmall(f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    x = luma_bt601(a)
    y = luma_bt601(b)
    taps = _gaussian_taps(SSIM_WINDOW, SSIM_SIGMA)
    mu_x = _windowed_mean(x, taps)
    mu_y = _windowed_mean(y, taps)
    xx = _windowed_mean(x * x, taps)
    yy = _windowed_mean(y * y, taps)
    xy = _windowed_mean(x * y, taps)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    c1 = (SSIM_K1 * SSIM_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_RANGE) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim_sequence(a: list[Frame], b: list[Frame]) -> tuple[list[float], float]:
    """Per-frame SSIM of two equally long frame sequences, plus the mean."""
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} frames vs {len(b)}")
    if not a:
        raise EmptyInput("no frames to compare")
    values = [ssim(fa, fb) for fa, fb in zip(a, b)]
    return values, sum(values) / len(values)
