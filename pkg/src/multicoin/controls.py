"""Rasterize trajectories into sparse RGB point controls.

Flow controls spread each point's vector with a truncated Gaussian weight;
depth controls copy each point's depth over a disk. Both splats are
winner-take-all: a pixel takes the nearest point (ties to the lower id,
anchors ordered after trajectories) and directions or depths are never
blended, so a decoded control pixel always corresponds to one real sample.

Corner depth anchors supply a global reference for the relative encoding:
six border dots at fixed multiples of the user-sample mean, three below on
the left edge and three above on the right.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadParams,
    EmptyInput,
    MissingDepthSample,
    NonPositiveDepth,
)
from .jsonio import read_json, write_json
from .media_io import (
    DepthMap,
    FlowField,
    Frame,
    Mask,
    decode_frame,
    encode_frame,
)
from .parallel import map_frames
from .trajectory import TrajectorySet
from .visualize import (
    DepthColorConfig,
    FlowColorConfig,
    depth_to_rgb,
    flow_to_rgb,
)


@dataclass(frozen=True)
class SplatConfig:
    sigma: float = 10.0       # Gaussian std in pixels
    truncate: float = 3.0     # cutoff at truncate * sigma
    disk_radius: float = 10.0

    def __post_init__(self):
        if not (self.sigma > 0):
            raise BadParams(f"sigma must be positive, got {self.sigma}")
        if not (self.disk_radius >= 1):
            raise BadParams(f"disk_radius must be >= 1, got {self.disk_radius}")
        if not (self.truncate >= 1):
            raise BadParams(f"truncate must be >= 1, got {self.truncate}")


@dataclass
class AnchorSet:
    """Six border anchors at fixed multiples of the user-depth mean."""

    anchors: list[tuple[float, float, float]]  # (x, y, depth)
    mu: float


@dataclass
class ControlClip:
    flow_frames: list[Frame]
    depth_frames: list[Frame]
    flow_cfg: FlowColorConfig
    depth_cfg: DepthColorConfig | None
    splat_cfg: SplatConfig

    def __post_init__(self):
        if len(self.flow_frames) != len(self.depth_frames):
            raise BadParams("flow/depth control sequences differ in length")
        for a, b in zip(self.flow_frames, self.depth_frames):
            if (a.width, a.height) != (b.width, b.height):
                raise BadParams("flow/depth control frames differ in size")


def _active_points(traj: TrajectorySet, t: int, need_depth: bool):
    """Points of trajectories covering frame t, ordered by id.

    With ``need_depth`` trajectories carrying no depth are skipped; a
    covering trajectory whose depth is absent while others have it raises
    at the caller's discretion.
    """
    out = []
    for tr in sorted(traj.trajectories, key=lambda tr: tr.id):
        idx = tr.index_of(t)
        if idx is None:
            continue
        if need_depth:
            if tr.depth is None:
                continue
            out.append((tr.xy[idx], float(tr.depth[idx])))
        else:
            out.append((tr.xy[idx], tr.flow_at(t)))
    return out


def splat_flow_gaussian(
    traj: TrajectorySet, t: int, cfg: SplatConfig = SplatConfig()
) -> FlowField:
    """Winner-take-all Gaussian splat of per-point flow at frame t.

    Each pixel takes the nearest trajectory point's vector scaled by
    exp(-dist^2 / (2 sigma^2)), zero beyond ``truncate * sigma``.
    """
    h, w = traj.height, traj.width
    pts = _active_points(traj, t, need_depth=False)
    out = np.zeros((h, w, 2), dtype=np.float64)
    if pts:
        pos = np.asarray([p for p, _ in pts], dtype=np.float64)      # (K, 2)
        vel = np.asarray([f for _, f in pts], dtype=np.float64)      # (K, 2)
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        d2 = (xs[:, :, None] - pos[:, 0]) ** 2 + (ys[:, :, None] - pos[:, 1]) ** 2
        winner = np.argmin(d2, axis=2)                               # ties: lower id
        d2w = np.take_along_axis(d2, winner[:, :, None], axis=2)[:, :, 0]
        weight = np.exp(-d2w / (2.0 * cfg.sigma**2))
        cutoff = (cfg.truncate * cfg.sigma) ** 2
        weight = np.where(d2w <= cutoff, weight, 0.0)
        out = weight[:, :, None] * vel[winner]
    return FlowField(out.astype(np.float32))


def splat_depth_disk(
    traj: TrajectorySet,
    t: int,
    cfg: SplatConfig = SplatConfig(),
    anchors: AnchorSet | None = None,
) -> tuple[DepthMap, Mask]:
    """Copy per-point depths over disks; uncovered pixels are invalid.

    The nearest point within ``disk_radius`` wins; ties go to the lower
    trajectory id, with anchors ordered after all trajectories. Depth
    values are copied verbatim, never interpolated.
    """
    h, w = traj.height, traj.width
    pts = _active_points(traj, t, need_depth=True)
    if anchors is not None:
        pts = pts + [(np.asarray([x, y], dtype=np.float64), float(d))
                     for x, y, d in anchors.anchors]
    if (
        not pts
        and anchors is None
        and traj.trajectories
        and all(tr.depth is None for tr in traj.trajectories)
    ):
        raise MissingDepthSample(
            "no trajectory carries depth samples and no anchors were given"
        )
    values = np.zeros((h, w), dtype=np.float64)
    valid = np.zeros((h, w), dtype=bool)
    if pts:
        pos = np.asarray([p for p, _ in pts], dtype=np.float64)
        depth = np.asarray([d for _, d in pts], dtype=np.float64)
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        d2 = (xs[:, :, None] - pos[:, 0]) ** 2 + (ys[:, :, None] - pos[:, 1]) ** 2
        r2 = float(cfg.disk_radius) ** 2
        covered = d2 <= r2
        d2 = np.where(covered, d2, np.inf)
        winner = np.argmin(d2, axis=2)
        valid = covered.any(axis=2)
        values = np.where(valid, depth[winner], 0.0)
    return DepthMap(values.astype(np.float32)), Mask(valid)


def depth_anchors(
    user_depths, width: int, height: int, inset: float = 10.0
) -> AnchorSet:
    """Anchor depths at fixed multiples of the user-sample mean.

    Below-mean anchors {mu/4, mu/3, mu/2} stack top-to-bottom on the left
    border, above-mean anchors {2 mu, 3 mu, 4 mu} on the right, all inset
    by ``inset`` pixels so their disks stay inside the frame.
    """
    samples = [float(d) for d in user_depths]
    if not samples:
        raise EmptyInput("need at least one user depth sample")
    for d in samples:
        if not np.isfinite(d) or d <= 0:
            raise NonPositiveDepth(f"depth samples must be finite and positive, got {d}")
    if width <= 2 * inset or height <= 2 * inset:
        raise BadParams(
            f"frame {width}x{height} too small for anchor inset {inset}"
        )
    mu = sum(samples) / len(samples)
    xl = float(inset)
    xr = float(width - 1 - inset)
    ys = (float(inset), float(height // 2), float(height - 1 - inset))
    anchors = [
        (xl, ys[0], mu / 4),
        (xl, ys[1], mu / 3),
        (xl, ys[2], mu / 2),
        (xr, ys[0], 2 * mu),
        (xr, ys[1], 3 * mu),
        (xr, ys[2], 4 * mu),
    ]
    return AnchorSet(anchors=anchors, mu=mu)


def render_control_clip(
    traj: TrajectorySet,
    frame_count: int,
    anchors: AnchorSet | None = None,
    splat_cfg: SplatConfig = SplatConfig(),
    flow_cfg: FlowColorConfig = FlowColorConfig(),
    depth_cfg: DepthColorConfig | None = None,
) -> ControlClip:
    """Render the sparse flow and depth control frame sequences.

    When ``depth_cfg`` is not given it is derived so sparse and dense paths
    agree: d_ref = mu and d_scale = 3 mu, with mu the anchor mean when
    anchors are present, else the mean of the set's depth samples. Without
    any depth information the depth frames are black.
    """
    if frame_count < 1:
        raise BadParams("frame_count must be >= 1")
    if depth_cfg is None:
        if anchors is not None:
            depth_cfg = DepthColorConfig(d_ref=anchors.mu, d_scale=3.0 * anchors.mu)
        else:
            samples = traj.depth_samples()
            if samples.size:
                mu = float(samples.sum() / samples.size)
                if mu <= 0:
                    raise NonPositiveDepth(f"mean trajectory depth {mu} not positive")
                depth_cfg = DepthColorConfig(d_ref=mu, d_scale=3.0 * mu)

    has_depth = depth_cfg is not None and (
        anchors is not None or any(tr.depth is not None for tr in traj.trajectories)
    )
    black = Frame(np.zeros((traj.height, traj.width, 3), dtype=np.uint8))

    def render(t: int) -> tuple[Frame, Frame]:
        flow_img = flow_to_rgb(splat_flow_gaussian(traj, t, splat_cfg), flow_cfg)
        if has_depth:
            depth, valid = splat_depth_disk(traj, t, splat_cfg, anchors)
            depth_img = depth_to_rgb(depth, depth_cfg, valid)
        else:
            depth_img = Frame(black.rgb.copy())
        return flow_img, depth_img

    rendered = map_frames(render, range(frame_count))
    return ControlClip(
        flow_frames=[r[0] for r in rendered],
        depth_frames=[r[1] for r in rendered],
        flow_cfg=flow_cfg,
        depth_cfg=depth_cfg,
        splat_cfg=splat_cfg,
    )


# ---------------------------------------------------------------------------
# on-disk layout: flow_%04d.png / depth_%04d.png + controls.json sidecar


def save_control_clip(clip: ControlClip, outdir) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for i, (flow_img, depth_img) in enumerate(zip(clip.flow_frames, clip.depth_frames)):
        (out / f"flow_{i:04d}.png").write_bytes(encode_frame(flow_img))
        (out / f"depth_{i:04d}.png").write_bytes(encode_frame(depth_img))
    sidecar = {
        "frames": len(clip.flow_frames),
        "mag_max": clip.flow_cfg.mag_max,
        "d_ref": None if clip.depth_cfg is None else clip.depth_cfg.d_ref,
        "d_scale": None if clip.depth_cfg is None else clip.depth_cfg.d_scale,
        "sigma": clip.splat_cfg.sigma,
        "disk_radius": clip.splat_cfg.disk_radius,
    }
    write_json(sidecar, out / "controls.json")


def load_control_clip(indir) -> ControlClip:
    src = Path(indir)
    sidecar = read_json(src / "controls.json")
    n = int(sidecar["frames"])
    flow_frames = [decode_frame((src / f"flow_{i:04d}.png").read_bytes()) for i in range(n)]
    depth_frames = [decode_frame((src / f"depth_{i:04d}.png").read_bytes()) for i in range(n)]
    depth_cfg = None
    if sidecar.get("d_ref") is not None:
        depth_cfg = DepthColorConfig(float(sidecar["d_ref"]), float(sidecar["d_scale"]))
    return ControlClip(
        flow_frames=flow_frames,
        depth_frames=depth_frames,
        flow_cfg=FlowColorConfig(mag_max=float(sidecar["mag_max"])),
        depth_cfg=depth_cfg,
        splat_cfg=SplatConfig(
            sigma=float(sidecar["sigma"]), disk_radius=float(sidecar["disk_radius"])
        ),
    )
