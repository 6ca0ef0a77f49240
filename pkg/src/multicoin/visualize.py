"""Motion and depth to RGB encodings, and their inverses.

Flow uses an HSV angle/magnitude mapping: hue encodes direction
(atan2(v, u) mapped to [0, 360)), saturation is fixed at 1, and value is
the magnitude normalized by an absolute ceiling ``mag_max`` and clamped to
1. Zero motion therefore encodes as black, which doubles as "no control"
on sparse backgrounds.

Depth uses a diverging red-white-blue ramp around a reference depth:
``s = clamp((d - d_ref) / d_scale, -1, +1)`` with s=-1 pure red (closer),
s=0 white, and s=+1 pure blue (farther), interpolated linearly in RGB.
Pixels carrying no depth encode as black.

Both encodings quantize to 8 bits by rounding; the inverses recover values
within the corresponding quantization bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousColor, BadParams
from .media_io import DepthMap, FlowField, Frame, Mask

RAMP_TOLERANCE = 8  # per-channel 8-bit tolerance for ramp classification


@dataclass(frozen=True)
class FlowColorConfig:
    """Flow encoding parameters; mag_max saturates at that many px/frame."""

    mag_max: float = 20.0

    def __post_init__(self):
        if not (self.mag_max > 0):
            raise BadParams(f"mag_max must be positive, got {self.mag_max}")


@dataclass(frozen=True)
class DepthColorConfig:
    """Depth ramp parameters: d_ref maps to white, d_ref +/- d_scale to the ends."""

    d_ref: float
    d_scale: float

    def __post_init__(self):
        if not np.isfinite(self.d_ref):
            raise BadParams("d_ref must be finite")
        if not (self.d_scale > 0):
            raise BadParams(f"d_scale must be positive, got {self.d_scale}")


def depth_cfg_from_values(values) -> DepthColorConfig:
    """Mean / 3x-mean policy shared by the sparse and dense depth paths."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise BadParams("cannot derive a depth ramp from zero samples")
    mu = float(arr.sum() / arr.size)
    if not (mu > 0):
        raise BadParams(f"mean depth must be positive, got {mu}")
    return DepthColorConfig(d_ref=mu, d_scale=3.0 * mu)


# ---------------------------------------------------------------------------
# flow


def _hsv_to_rgb_unit(hue_deg: np.ndarray, value: np.ndarray) -> np.ndarray:
    """HSV to RGB with saturation fixed at 1; returns floats in [0, 1]."""
    sector = np.floor(hue_deg / 60.0).astype(np.intp) % 6
    frac = value * (1.0 - np.abs((hue_deg / 60.0) % 2.0 - 1.0))
    zero = np.zeros_like(value)
    table = [
        (value, frac, zero),
        (frac, value, zero),
        (zero, value, frac),
        (zero, frac, value),
        (frac, zero, value),
        (value, zero, frac),
    ]
    r = np.choose(sector, [t[0] for t in table])
    g = np.choose(sector, [t[1] for t in table])
    b = np.choose(sector, [t[2] for t in table])
    return np.stack([r, g, b], axis=-1)


def flow_to_rgb(flow: FlowField, cfg: FlowColorConfig = FlowColorConfig()) -> Frame:
    """Encode a flow field as an RGB frame (hue = direction, value = magnitude)."""
    u = flow.vectors[:, :, 0].astype(np.float64)
    v = flow.vectors[:, :, 1].astype(np.float64)
    mag = np.sqrt(u * u + v * v)
    hue = np.degrees(np.arctan2(v, u)) % 360.0
    value = np.minimum(mag / cfg.mag_max, 1.0)
    rgb = _hsv_to_rgb_unit(hue, value)
    return Frame(np.rint(rgb * 255.0).astype(np.uint8))


def rgb_to_flow(frame: Frame, cfg: FlowColorConfig = FlowColorConfig()) -> FlowField:
    """Invert flow_to_rgb; black pixels decode to (0, 0)."""
    rgb = frame.rgb.astype(np.float64) / 255.0
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    value = rgb.max(axis=2)
    chroma = value - rgb.min(axis=2)
    safe = np.where(chroma > 0, chroma, 1.0)
    hp = np.zeros_like(value)
    is_r = (r >= g) & (r >= b)
    is_g = (~is_r) & (g >= b)
    is_b = ~(is_r | is_g)
    hp = np.where(is_r, ((g - b) / safe) % 6.0, hp)
    hp = np.where(is_g, (b - r) / safe + 2.0, hp)
    hp = np.where(is_b, (r - g) / safe + 4.0, hp)
    hue = np.where(chroma > 0, hp * 60.0, 0.0)
    mag = value * cfg.mag_max
    rad = np.radians(hue)
    vec = np.stack([mag * np.cos(rad), mag * np.sin(rad)], axis=2)
    return FlowField(vec.astype(np.float32))


# ---------------------------------------------------------------------------
# depth


def _ramp_rgb_unit(s: np.ndarray) -> np.ndarray:
    """Red-white-blue diverging ramp; s in [-1, 1], returns floats in [0, 1]."""
    low = np.clip(1.0 + np.minimum(s, 0.0), 0.0, 1.0)   # G=B on the red side
    high = np.clip(1.0 - np.maximum(s, 0.0), 0.0, 1.0)  # R=G on the blue side
    r = np.where(s <= 0, 1.0, high)
    g = np.where(s <= 0, low, high)
    b = np.where(s <= 0, low, 1.0)
    return np.stack([r, g, b], axis=-1)


def depth_to_rgb(
    depth: DepthMap,
    cfg: DepthColorConfig,
    valid: Mask | None = None,
) -> Frame:
    """Encode depth on the red-white-blue ramp; invalid pixels render black."""
    d = depth.values.astype(np.float64)
    s = np.clip((d - cfg.d_ref) / cfg.d_scale, -1.0, 1.0)
    rgb = np.rint(_ramp_rgb_unit(s) * 255.0).astype(np.uint8)
    if valid is not None:
        if valid.bits.shape != d.shape:
            raise BadParams("validity mask shape differs from depth shape")
        rgb[~valid.bits] = 0
    return Frame(rgb)


def rgb_to_depth(frame: Frame, cfg: DepthColorConfig) -> tuple[DepthMap, Mask]:
    """Invert depth_to_rgb on non-black pixels; black pixels come back invalid.

    Raises AmbiguousColor when a pixel is neither black nor on the ramp
    within RAMP_TOLERANCE per channel.
    """
    rgb = frame.rgb.astype(np.int64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    tol = RAMP_TOLERANCE
    black = (r <= tol) & (g <= tol) & (b <= tol)
    on_low = (255 - r <= tol) & (np.abs(g - b) <= tol)    # red..white side
    on_high = (255 - b <= tol) & (np.abs(r - g) <= tol)   # white..blue side
    bad = ~(black | on_low | on_high)
    if np.any(bad):
        ys, xs = np.nonzero(bad)
        y, x = int(ys[0]), int(xs[0])
        raise AmbiguousColor(
            f"pixel ({x},{y}) = {tuple(int(c) for c in frame.rgb[y, x])} "
            "is neither black nor on the depth ramp"
        )
    s_low = (g + b) / (2.0 * 255.0) - 1.0
    s_high = 1.0 - (r + g) / (2.0 * 255.0)
    # where both sides match (near white) keep the larger deviation
    s = np.where(on_low & ~on_high, s_low, s_high)
    both = on_low & on_high
    s = np.where(both & (np.abs(s_low) >= np.abs(s_high)), s_low, s)
    d = cfg.d_ref + s * cfg.d_scale
    valid = ~black
    depth = np.where(valid, d, 0.0).astype(np.float32)
    return DepthMap(depth), Mask(valid)
