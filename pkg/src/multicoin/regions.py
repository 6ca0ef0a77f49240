"""Augmented frame generation: region extraction, translation, and slotting.

A moving region is segmented from dense flow as the 8-connected component
around an anchor whose magnitude stays above a fraction of the anchor's,
then translated rigidly along a trajectory into target-region frames. The
augmented clip slots keyframes and targets at their temporal positions and
fills the rest with black frames and all-zero validity masks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import label

from .errors import (
    AnchorMismatch,
    BadParams,
    MissingEndpoints,
    OutOfBounds,
    SlotCollision,
    StaticAnchor,
    TimeOutOfRange,
)
from .jsonio import read_json, write_json
from .media_io import (
    FlowField,
    Frame,
    Mask,
    decode_frame,
    decode_mask,
    encode_frame,
    encode_mask,
)
from .trajectory import Trajectory

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass
class RegionSpec:
    """A region footprint in a source keyframe plus its trajectory seed."""

    mask: Mask
    source_frame: int
    anchor: tuple[float, float]

    def __post_init__(self):
        if not self.mask.bits.any():
            raise BadParams("region mask is empty")
        ax, ay = int(round(self.anchor[0])), int(round(self.anchor[1]))
        if not (0 <= ax < self.mask.width and 0 <= ay < self.mask.height):
            raise OutOfBounds(f"anchor {self.anchor} outside mask bounds")
        if not self.mask.bits[ay, ax]:
            raise BadParams(f"anchor {self.anchor} not inside the region mask")


@dataclass
class AugmentedClip:
    """Temporally slotted frames and validity masks."""

    frames: list[Frame]
    masks: list[Mask]
    keyframe_positions: list[int]
    target_positions: list[int]

    def __post_init__(self):
        if len(self.frames) != len(self.masks):
            raise BadParams("frame and mask sequences differ in length")
        if set(self.keyframe_positions) & set(self.target_positions):
            raise SlotCollision("keyframe and target positions overlap")

    @property
    def length(self) -> int:
        return len(self.frames)


def segment_region(
    flow: FlowField, anchor: tuple[float, float], threshold_frac: float = 0.5
) -> Mask:
    """Flow-magnitude segmentation around an anchor.

    Returns the 8-connected component containing the anchor under the
    predicate ``|flow(p)| >= threshold_frac * |flow(anchor)|``. The anchor
    is taken at its nearest pixel and must sit on nonzero flow.
    """
    ax, ay = int(round(anchor[0])), int(round(anchor[1]))
    if not (0 <= ax < flow.width and 0 <= ay < flow.height):
        raise OutOfBounds(f"anchor {anchor} outside the flow field")
    mag = flow.magnitude()
    anchor_mag = mag[ay, ax]
    if anchor_mag == 0:
        raise StaticAnchor(f"anchor {anchor} sits on zero flow")
    predicate = mag >= threshold_frac * anchor_mag
    labels, _count = label(predicate, structure=EIGHT_CONNECTED)
    return Mask(labels == labels[ay, ax])


def translate_region(
    keyframe: Frame,
    region: RegionSpec,
    traj: Trajectory,
    sample_ts: list[int],
) -> list[tuple[Frame, Mask]]:
    """Rigidly shift the region content along the trajectory.

    For each requested frame the displacement is the rounded trajectory
    offset from the source frame; region pixels shifted out of bounds are
    dropped, everything else is black with a zero mask.
    """
    if (keyframe.width, keyframe.height) != (region.mask.width, region.mask.height):
        raise BadParams("keyframe and region mask differ in size")
    if traj.index_of(region.source_frame) is None:
        raise TimeOutOfRange(
            f"trajectory has no point at source frame {region.source_frame}"
        )
    origin = traj.position_at(region.source_frame)
    if np.linalg.norm(origin - np.asarray(region.anchor, dtype=np.float64)) > 1.0:
        raise AnchorMismatch(
            f"anchor {region.anchor} is more than 1 px from the trajectory "
            f"position ({float(origin[0])}, {float(origin[1])}) at the source frame"
        )

    h, w = keyframe.height, keyframe.width
    ys, xs = np.nonzero(region.mask.bits)
    out = []
    for t in sample_ts:
        if traj.index_of(int(t)) is None:
            raise TimeOutOfRange(f"trajectory has no point at t={t}")
        delta = traj.position_at(int(t)) - origin
        dx, dy = int(round(delta[0])), int(round(delta[1]))
        ny, nx = ys + dy, xs + dx
        inb = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        frame = np.zeros((h, w, 3), dtype=np.uint8)
        bits = np.zeros((h, w), dtype=bool)
        frame[ny[inb], nx[inb]] = keyframe.rgb[ys[inb], xs[inb]]
        bits[ny[inb], nx[inb]] = True
        out.append((Frame(frame), Mask(bits)))
    return out


def default_target_times(length: int, count: int) -> list[int]:
    """Evenly spaced slot indices strictly between the endpoint keyframes."""
    if length < 3 or count < 1:
        return []
    ideal = np.linspace(0, length - 1, count + 2)[1:-1]
    return sorted({int(round(v)) for v in ideal} - {0, length - 1})


def compose_augmented_clip(
    keyframes: list[tuple[int, Frame]],
    targets: list[tuple[int, Frame, Mask]],
    length: int,
) -> AugmentedClip:
    """Slot keyframes and target regions into a fixed-length clip.

    Keyframe slots carry all-ones masks; target slots carry their region
    masks with content outside the mask blacked out; unassigned slots are
    black frames with zero masks.
    """
    if length < 2:
        raise BadParams("clip length must be >= 2")
    if not keyframes:
        raise MissingEndpoints("no keyframes given")
    w, h = keyframes[0][1].width, keyframes[0][1].height

    key_idx = [i for i, _ in keyframes]
    tgt_idx = [i for i, _, _ in targets]
    for i in key_idx + tgt_idx:
        if not (0 <= i < length):
            raise BadParams(f"slot index {i} outside clip of length {length}")
    if len(set(key_idx)) != len(key_idx) or len(set(tgt_idx)) != len(tgt_idx):
        raise SlotCollision("duplicate slot assignment")
    if set(key_idx) & set(tgt_idx):
        raise SlotCollision("keyframe and target assigned to the same slot")
    if 0 not in key_idx or (length - 1) not in key_idx:
        raise MissingEndpoints("keyframes must include slots 0 and length-1")

    frames = [Frame(np.zeros((h, w, 3), dtype=np.uint8)) for _ in range(length)]
    masks = [Mask(np.zeros((h, w), dtype=bool)) for _ in range(length)]
    for i, frame in keyframes:
        if (frame.width, frame.height) != (w, h):
            raise BadParams("keyframes differ in size")
        frames[i] = Frame(frame.rgb.copy())
        masks[i] = Mask(np.ones((h, w), dtype=bool))
    for i, frame, mask in targets:
        if (frame.width, frame.height) != (w, h) or (mask.width, mask.height) != (w, h):
            raise BadParams("target frame/mask size differs from keyframes")
        rgb = np.where(mask.bits[:, :, None], frame.rgb, 0).astype(np.uint8)
        frames[i] = Frame(rgb)
        masks[i] = Mask(mask.bits.copy())
    return AugmentedClip(
        frames=frames,
        masks=masks,
        keyframe_positions=sorted(key_idx),
        target_positions=sorted(tgt_idx),
    )


# ---------------------------------------------------------------------------
# on-disk layout: frame_%04d.png / mask_%04d.png + slots.json


def save_augmented_clip(clip: AugmentedClip, outdir) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for i, (frame, mask) in enumerate(zip(clip.frames, clip.masks)):
        (out / f"frame_{i:04d}.png").write_bytes(encode_frame(frame))
        (out / f"mask_{i:04d}.png").write_bytes(encode_mask(mask))
    write_json(
        {
            "length": clip.length,
            "keyframes": clip.keyframe_positions,
            "targets": clip.target_positions,
        },
        out / "slots.json",
    )


def load_augmented_clip(indir) -> AugmentedClip:
    src = Path(indir)
    slots = read_json(src / "slots.json")
    n = int(slots["length"])
    frames = [decode_frame((src / f"frame_{i:04d}.png").read_bytes()) for i in range(n)]
    masks = [decode_mask((src / f"mask_{i:04d}.png").read_bytes()) for i in range(n)]
    return AugmentedClip(
        frames=frames,
        masks=masks,
        keyframe_positions=[int(i) for i in slots["keyframes"]],
        target_positions=[int(i) for i in slots["targets"]],
    )
