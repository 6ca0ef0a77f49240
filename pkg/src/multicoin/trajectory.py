"""Sparse trajectory production: seeding, tracking, matching, keyframe plans.

Trajectories are time-indexed sub-pixel point paths. Tracking advects seeds
through dense flow with forward Euler steps and bilinear sampling, clamping
at the frame border. Endpoint-matched trajectories come from a corner
detector plus patch correlation and are linear in time by construction.

The interchange format is the trajectory manifest JSON::

    {"width": W, "height": H, "frames": T,
     "trajectories": [{"id": 0, "points": [{"t": 0, "x": 1.0, "y": 2.0,
                                            "depth": 3.0}, ...]}]}

``depth`` is optional per point. Flow samples recorded by tracking are not
serialized; consumers that need per-point flow for trajectories loaded from
a manifest fall back to finite differences of consecutive positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter, maximum_filter

from .errors import (
    BadParams,
    DimensionMismatch,
    LengthMismatch,
    MissingFlowSample,
    NoMatches,
    NoMotion,
    OutOfBounds,
)
from .media_io import DepthMap, FlowField, Frame, _bilinear_many, luma_bt601


@dataclass
class Trajectory:
    """One tracked point path; parallel arrays indexed by point."""

    id: int
    ts: np.ndarray                 # (N,) int, strictly increasing
    xy: np.ndarray                 # (N, 2) float64
    depth: np.ndarray | None = None    # (N,) float64
    flow: np.ndarray | None = None     # (N, 2) float64, sampled along the path

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=np.int64)
        self.xy = np.asarray(self.xy, dtype=np.float64)
        if self.ts.ndim != 1 or self.xy.shape != (self.ts.size, 2):
            raise BadParams("trajectory ts/xy shapes disagree")
        if self.ts.size == 0:
            raise BadParams("trajectory must have at least one point")
        if np.any(np.diff(self.ts) <= 0):
            raise BadParams("trajectory frame indices must be strictly increasing")
        if self.depth is not None:
            self.depth = np.asarray(self.depth, dtype=np.float64)
            if self.depth.shape != (self.ts.size,):
                raise BadParams("trajectory depth length mismatch")
        if self.flow is not None:
            self.flow = np.asarray(self.flow, dtype=np.float64)
            if self.flow.shape != (self.ts.size, 2):
                raise BadParams("trajectory flow shape mismatch")

    @property
    def t_first(self) -> int:
        return int(self.ts[0])

    @property
    def t_last(self) -> int:
        return int(self.ts[-1])

    def index_of(self, t: int) -> int | None:
        idx = np.searchsorted(self.ts, t)
        if idx < self.ts.size and self.ts[idx] == t:
            return int(idx)
        return None

    def position_at(self, t: int) -> np.ndarray:
        idx = self.index_of(t)
        if idx is None:
            raise LengthMismatch(f"trajectory {self.id} has no point at t={t}")
        return self.xy[idx]

    def flow_at(self, t: int) -> np.ndarray:
        """Flow sample at frame t: explicit if recorded, else a finite
        difference of consecutive positions (backward at the last point)."""
        idx = self.index_of(t)
        if idx is None:
            raise LengthMismatch(f"trajectory {self.id} has no point at t={t}")
        if self.flow is not None:
            return self.flow[idx]
        if self.ts.size < 2:
            raise MissingFlowSample(
                f"trajectory {self.id} is a single point with no flow sample"
            )
        if idx < self.ts.size - 1:
            return self.xy[idx + 1] - self.xy[idx]
        return self.xy[idx] - self.xy[idx - 1]

    def has_depth(self) -> bool:
        return self.depth is not None

    def depth_at(self, t: int) -> float:
        idx = self.index_of(t)
        if idx is None or self.depth is None:
            raise LengthMismatch(f"trajectory {self.id} has no depth at t={t}")
        return float(self.depth[idx])

    def path(self) -> np.ndarray:
        """The (N, 2) point path, for metric comparisons."""
        return self.xy.copy()


@dataclass
class TrajectorySet:
    width: int
    height: int
    frame_count: int
    trajectories: list[Trajectory] = field(default_factory=list)

    def __post_init__(self):
        ids = [t.id for t in self.trajectories]
        if len(ids) != len(set(ids)):
            raise BadParams("trajectory ids must be unique")
        for traj in self.trajectories:
            np.clip(traj.xy[:, 0], 0, self.width - 1, out=traj.xy[:, 0])
            np.clip(traj.xy[:, 1], 0, self.height - 1, out=traj.xy[:, 1])

    def depth_samples(self) -> np.ndarray:
        """All per-point depth samples across the set (may be empty)."""
        parts = [t.depth for t in self.trajectories if t.depth is not None]
        if not parts:
            return np.empty(0, dtype=np.float64)
        return np.concatenate(parts)


@dataclass
class KeyframePlan:
    frame_count: int
    positions: list[int]

    def __post_init__(self):
        if self.frame_count < 2:
            raise BadParams("keyframe plan needs at least 2 frames")
        ok = (
            sorted(set(self.positions)) == self.positions
            and self.positions[0] == 0
            and self.positions[-1] == self.frame_count - 1
            and 2 <= len(self.positions) <= 7
        )
        if not ok:
            raise BadParams(f"invalid keyframe positions {self.positions}")


# ---------------------------------------------------------------------------
# seeding and tracking


def select_seeds(flow: FlowField, k: int = 8, min_sep: float = 16.0) -> list[tuple[int, int]]:
    """Greedy high-magnitude seed selection with a minimum separation.

    Candidates are visited in descending flow magnitude (ties in row-major
    order); one closer than ``min_sep`` to an already chosen seed is
    skipped. Zero-magnitude pixels are never selected.
    """
    if k < 1:
        raise BadParams(f"k must be >= 1, got {k}")
    if min_sep < 0:
        raise BadParams(f"min_sep must be >= 0, got {min_sep}")
    mag = flow.magnitude().ravel()
    if not np.any(mag > 0):
        raise NoMotion("flow field is identically zero")
    order = np.argsort(-mag, kind="stable")
    w = flow.width
    chosen: list[tuple[int, int]] = []
    for idx in order:
        if mag[idx] == 0 or len(chosen) >= k:
            break
        x, y = int(idx % w), int(idx // w)
        if any((x - cx) ** 2 + (y - cy) ** 2 < min_sep**2 for cx, cy in chosen):
            continue
        chosen.append((x, y))
    return chosen


def track_points(
    flows: list[FlowField], seeds: list[tuple[float, float]]
) -> TrajectorySet:
    """Advect seeds through dense flow with forward Euler steps.

    Each step samples the current flow field bilinearly at the point and
    clamps the result to the frame; a border-pinned trajectory is still
    emitted. Every point records the flow sampled there (the final point
    samples the last field at its resting position), so trajectories carry
    ``len(flows) + 1`` points.
    """
    if not flows:
        raise BadParams("need at least one flow field")
    w, h = flows[0].width, flows[0].height
    for f in flows:
        if (f.width, f.height) != (w, h):
            raise DimensionMismatch("flow fields disagree on dimensions")
    pos = np.asarray(seeds, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise BadParams("seeds must be (x, y) pairs")
    if np.any(pos[:, 0] < 0) or np.any(pos[:, 0] > w - 1) or np.any(pos[:, 1] < 0) or np.any(pos[:, 1] > h - 1):
        raise OutOfBounds("seed outside frame bounds")

    n = pos.shape[0]
    steps = len(flows)
    points = np.empty((steps + 1, n, 2), dtype=np.float64)
    samples = np.empty((steps + 1, n, 2), dtype=np.float64)
    points[0] = pos
    for t, f in enumerate(flows):
        vel = _bilinear_many(f.vectors, points[t][:, 0], points[t][:, 1])
        samples[t] = vel
        nxt = points[t] + vel
        nxt[:, 0] = np.clip(nxt[:, 0], 0, w - 1)
        nxt[:, 1] = np.clip(nxt[:, 1], 0, h - 1)
        points[t + 1] = nxt
    samples[steps] = _bilinear_many(
        flows[-1].vectors, points[steps][:, 0], points[steps][:, 1]
    )

    ts = np.arange(steps + 1)
    trajectories = [
        Trajectory(id=i, ts=ts.copy(), xy=points[:, i], flow=samples[:, i])
        for i in range(n)
    ]
    return TrajectorySet(width=w, height=h, frame_count=steps + 1, trajectories=trajectories)


def attach_depth(traj: TrajectorySet, depths: list[DepthMap]) -> TrajectorySet:
    """Sample per-point depth along each path from per-frame depth maps."""
    if not depths:
        raise LengthMismatch("no depth maps given")
    for d in depths:
        if (d.width, d.height) != (traj.width, traj.height):
            raise DimensionMismatch("depth dimensions differ from trajectory bounds")
    out = []
    for tr in traj.trajectories:
        if tr.t_last >= len(depths) or tr.t_first < 0:
            raise LengthMismatch(
                f"trajectory {tr.id} spans t={tr.t_first}..{tr.t_last} but only "
                f"{len(depths)} depth maps are available"
            )
        sampled = np.empty(tr.ts.size, dtype=np.float64)
        for i, t in enumerate(tr.ts):
            sampled[i] = _bilinear_many(
                depths[int(t)].values, tr.xy[i : i + 1, 0], tr.xy[i : i + 1, 1]
            )[0]
        out.append(
            Trajectory(id=tr.id, ts=tr.ts.copy(), xy=tr.xy.copy(), depth=sampled,
                       flow=None if tr.flow is None else tr.flow.copy())
        )
    return TrajectorySet(traj.width, traj.height, traj.frame_count, out)


# ---------------------------------------------------------------------------
# endpoint matching


@dataclass(frozen=True)
class AutoTrajectoryConfig:
    frame_count: int
    threshold: float = 0.8      # minimum NCC for a pair to survive
    max_corners: int = 64
    nms_radius: int = 3
    patch_radius: int = 5       # 11x11 correlation patches
    harris_k: float = 0.04
    harris_sigma: float = 1.5
    rel_response: float = 0.01  # corner threshold relative to peak response

    def __post_init__(self):
        if self.frame_count < 2:
            raise BadParams("frame_count must be >= 2")


def _harris_corners(gray: np.ndarray, cfg: AutoTrajectoryConfig) -> list[tuple[int, int]]:
    iy, ix = np.gradient(gray)
    ixx = gaussian_filter(ix * ix, cfg.harris_sigma)
    iyy = gaussian_filter(iy * iy, cfg.harris_sigma)
    ixy = gaussian_filter(ix * iy, cfg.harris_sigma)
    resp = ixx * iyy - ixy * ixy - cfg.harris_k * (ixx + iyy) ** 2
    peak = resp.max()
    if peak <= 0:
        return []
    size = 2 * cfg.nms_radius + 1
    local_max = maximum_filter(resp, size=size) == resp
    strong = resp > cfg.rel_response * peak
    h, w = gray.shape
    m = cfg.patch_radius
    border = np.zeros_like(strong)
    if h > 2 * m and w > 2 * m:
        border[m : h - m, m : w - m] = True
    ys, xs = np.nonzero(local_max & strong & border)
    if ys.size == 0:
        return []
    order = np.argsort(-resp[ys, xs], kind="stable")[: cfg.max_corners]
    return [(int(xs[i]), int(ys[i])) for i in order]


def _patch(gray: np.ndarray, x: int, y: int, r: int) -> np.ndarray:
    return gray[y - r : y + r + 1, x - r : x + r + 1]


def _ncc_matrix(gray1, corners1, gray2, corners2, r: int) -> np.ndarray:
    def stack(gray, corners):
        patches = np.stack([_patch(gray, x, y, r).ravel() for x, y in corners])
        patches = patches - patches.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(patches, axis=1)
        return patches, norms

    p1, n1 = stack(gray1, corners1)
    p2, n2 = stack(gray2, corners2)
    denom = np.outer(n1, n2)
    ncc = np.full((len(corners1), len(corners2)), -np.inf)
    ok = denom > 0
    raw = p1 @ p2.T
    ncc[ok] = raw[ok] / denom[ok]
    return ncc


def auto_trajectory(
    first: Frame, last: Frame, max_pairs: int, cfg: AutoTrajectoryConfig
) -> TrajectorySet:
    """Linear trajectories between corner features matched across endpoints.

    Corners (Harris response with non-maximum suppression) in both frames
    are matched by normalized cross-correlation of 11x11 grayscale patches;
    mutual-best pairs at or above ``cfg.threshold`` survive. Each pair
    yields a trajectory whose points interpolate linearly from the
    first-frame to the last-frame location over ``cfg.frame_count`` frames.
    """
    if (first.width, first.height) != (last.width, last.height):
        raise DimensionMismatch("endpoint frames differ in size")
    g1 = luma_bt601(first)
    g2 = luma_bt601(last)
    c1 = _harris_corners(g1, cfg)
    c2 = _harris_corners(g2, cfg)
    if not c1 or not c2:
        raise NoMatches("no corner features detected")
    ncc = _ncc_matrix(g1, c1, g2, c2, cfg.patch_radius)
    best12 = np.argmax(ncc, axis=1)
    best21 = np.argmax(ncc, axis=0)
    pairs = [
        (i, int(best12[i]), ncc[i, best12[i]])
        for i in range(len(c1))
        if best21[best12[i]] == i and ncc[i, best12[i]] >= cfg.threshold
    ]
    if not pairs:
        raise NoMatches(f"no mutual pair reached NCC {cfg.threshold}")
    pairs.sort(key=lambda p: (-p[2], p[0], p[1]))
    pairs = pairs[:max_pairs]

    f = cfg.frame_count
    ts = np.arange(f)
    trajectories = []
    for tid, (i, j, _score) in enumerate(pairs):
        a = np.asarray(c1[i], dtype=np.float64)
        b = np.asarray(c2[j], dtype=np.float64)
        frac = ts / (f - 1)
        xy = a[None, :] + frac[:, None] * (b - a)[None, :]
        trajectories.append(Trajectory(id=tid, ts=ts.copy(), xy=xy))
    return TrajectorySet(first.width, first.height, f, trajectories)


# ---------------------------------------------------------------------------
# keyframe sampling


def sample_keyframes(frame_count: int, rng_seed: int) -> KeyframePlan:
    """Endpoints plus 0-5 random interior keyframes, deterministic per seed."""
    if frame_count < 2:
        raise BadParams("frame_count must be >= 2")
    rng = np.random.default_rng(rng_seed)
    k = int(rng.integers(0, 6))
    interior = np.arange(1, frame_count - 1)
    k = min(k, interior.size)
    extra = rng.choice(interior, size=k, replace=False) if k > 0 else []
    positions = sorted({0, frame_count - 1, *(int(i) for i in extra)})
    return KeyframePlan(frame_count=frame_count, positions=positions)


# ---------------------------------------------------------------------------
# manifest JSON


def to_manifest(ts: TrajectorySet) -> dict:
    trajectories = []
    for tr in ts.trajectories:
        points = []
        for i, t in enumerate(tr.ts):
            p = {"t": int(t), "x": float(tr.xy[i, 0]), "y": float(tr.xy[i, 1])}
            if tr.depth is not None:
                p["depth"] = float(tr.depth[i])
            points.append(p)
        trajectories.append({"id": tr.id, "points": points})
    return {
        "width": ts.width,
        "height": ts.height,
        "frames": ts.frame_count,
        "trajectories": trajectories,
    }


def from_manifest(doc: dict) -> TrajectorySet:
    try:
        width = int(doc["width"])
        height = int(doc["height"])
        frames = int(doc["frames"])
        raw = doc["trajectories"]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadParams(f"malformed trajectory manifest: {exc}") from exc
    trajectories = []
    for entry in raw:
        try:
            tid = int(entry["id"])
            pts = sorted(entry["points"], key=lambda p: int(p["t"]))
            ts_arr = np.asarray([int(p["t"]) for p in pts])
            xy = np.asarray([[float(p["x"]), float(p["y"])] for p in pts])
            depths = [p.get("depth") for p in pts]
        except (KeyError, TypeError, ValueError) as exc:
            raise BadParams(f"malformed trajectory entry: {exc}") from exc
        depth = None
        if any(d is not None for d in depths):
            if any(d is None for d in depths):
                raise BadParams(
                    f"trajectory {tid} mixes points with and without depth"
                )
            depth = np.asarray([float(d) for d in depths])
        trajectories.append(Trajectory(id=tid, ts=ts_arr, xy=xy, depth=depth))
    return TrajectorySet(width, height, frames, trajectories)


def load_manifest(path) -> TrajectorySet:
    with open(path, "r", encoding="utf-8") as fh:
        return from_manifest(json.load(fh))
