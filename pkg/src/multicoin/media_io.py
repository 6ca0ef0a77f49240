"""Bit-exact codecs and sampling for flow, depth, image, and mask data.

Interchange formats:

* flow   - Middlebury ``.flo``: magic ``PIEH``, little-endian int32 width and
  height, then ``width*height`` interleaved (u, v) little-endian float32.
* depth  - grayscale PFM: ``Pf\\n<w> <h>\\n<scale>\\n`` followed by float32
  samples stored bottom-to-top; a negative scale means little-endian.
* frames - 8-bit RGB PNG; binary PPM (P6, maxval 255) accepted as input.
* masks  - 8-bit grayscale PNG holding only 0 and 255.

Coordinates are x rightward, y downward, origin at the top-left texel
center. Arrays are indexed ``[y, x]``.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    BadHeader,
    BadMagic,
    BadParams,
    CorruptStream,
    NonFiniteValue,
    OutOfBounds,
    TruncatedPayload,
    UnsupportedBitDepth,
    UnsupportedColorPfm,
)

FLO_MAGIC = b"PIEH"

# depth layers of the moving_square fixture (relative depth, larger = farther)
SQUARE_DEPTH = 2.0
BACKGROUND_DEPTH = 8.0
UNIFORM_DEPTH = 4.0


@dataclass
class FlowField:
    """Dense per-pixel (u, v) displacement in pixels per frame step."""

    vectors: np.ndarray  # (H, W, 2) float32

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float32)
        if v.ndim != 3 or v.shape[2] != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise BadParams(f"flow vectors must be (H, W, 2), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue("flow contains non-finite components")
        self.vectors = v

    @property
    def width(self) -> int:
        return self.vectors.shape[1]

    @property
    def height(self) -> int:
        return self.vectors.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.vectors.astype(np.float64), axis=2)


@dataclass
class DepthMap:
    """Dense relative depth, unitless, larger = farther."""

    values: np.ndarray  # (H, W) float32

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise BadParams(f"depth values must be (H, W), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue("depth contains non-finite values")
        self.values = v

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass
class Frame:
    """8-bit RGB image."""

    rgb: np.ndarray  # (H, W, 3) uint8

    def __post_init__(self):
        v = np.asarray(self.rgb)
        if v.dtype != np.uint8:
            raise UnsupportedBitDepth(f"frame must be uint8, got {v.dtype}")
        if v.ndim != 3 or v.shape[2] != 3 or v.shape[0] < 1 or v.shape[1] < 1:
            raise BadParams(f"frame must be (H, W, 3), got {v.shape}")
        self.rgb = v

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]


@dataclass
class Mask:
    """Binary validity map, True = valid."""

    bits: np.ndarray  # (H, W) bool

    def __post_init__(self):
        v = np.asarray(self.bits).astype(bool)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise BadParams(f"mask must be (H, W), got {v.shape}")
        self.bits = v

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


# ---------------------------------------------------------------------------
# .flo codec


def decode_flo(data: bytes) -> FlowField:
    """Decode a Middlebury .flo byte stream."""
    if len(data) < 4 or data[:4] != FLO_MAGIC:
        raise BadMagic(f"expected magic {FLO_MAGIC!r}, got {data[:4]!r}")
    if len(data) < 12:
        raise TruncatedPayload("flo header truncated")
    w, h = struct.unpack("<ii", data[4:12])
    if w < 1 or h < 1:
        raise BadHeader(f"non-positive flo dimensions {w}x{h}")
    expected = 8 * w * h
    payload = data[12:]
    if len(payload) != expected:
        raise TruncatedPayload(
            f"expected {expected} payload bytes for {w}x{h}, got {len(payload)}"
        )
    vec = np.frombuffer(payload, dtype="<f4").reshape(h, w, 2)
    if not np.all(np.isfinite(vec)):
        raise NonFiniteValue("flo payload contains non-finite values")
    return FlowField(vec.copy())


def encode_flo(flow: FlowField) -> bytes:
    """Encode a FlowField as Middlebury .flo bytes."""
    header = FLO_MAGIC + struct.pack("<ii", flow.width, flow.height)
    return header + flow.vectors.astype("<f4").tobytes()


# ---------------------------------------------------------------------------
# PFM codec


def _read_pfm_line(data: bytes, pos: int) -> tuple[bytes, int]:
    end = data.find(b"\n", pos)
    if end < 0:
        raise BadHeader("unterminated PFM header line")
    return data[pos:end], end + 1


def decode_pfm(data: bytes) -> DepthMap:
    """Decode a grayscale PFM stream, flipping to top-to-bottom row order."""
    ident, pos = _read_pfm_line(data, 0)
    if ident == b"PF":
        raise UnsupportedColorPfm("color PFM ('PF') not supported")
    if ident != b"Pf":
        raise BadHeader(f"expected 'Pf' identifier, got {ident!r}")
    dims, pos = _read_pfm_line(data, pos)
    parts = dims.split()
    if len(parts) != 2:
        raise BadHeader(f"bad PFM dimensions line {dims!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise BadHeader(f"bad PFM dimensions line {dims!r}") from exc
    if w < 1 or h < 1:
        raise BadHeader(f"non-positive PFM dimensions {w}x{h}")
    scale_line, pos = _read_pfm_line(data, pos)
    try:
        scale = float(scale_line)
    except ValueError as exc:
        raise BadHeader(f"bad PFM scale line {scale_line!r}") from exc
    if scale == 0.0:
        raise BadHeader("PFM scale must be nonzero")
    dtype = "<f4" if scale < 0 else ">f4"
    expected = 4 * w * h
    payload = data[pos:]
    if len(payload) != expected:
        raise TruncatedPayload(
            f"expected {expected} payload bytes for {w}x{h}, got {len(payload)}"
        )
    values = np.frombuffer(payload, dtype=dtype).reshape(h, w)
    values = values[::-1]  # stored bottom-up
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("PFM payload contains non-finite values")
    return DepthMap(values.astype(np.float32))


def encode_pfm(depth: DepthMap) -> bytes:
    """Encode a DepthMap as little-endian grayscale PFM (bottom-up rows)."""
    header = f"Pf\n{depth.width} {depth.height}\n-1.0\n".encode("ascii")
    return header + depth.values[::-1].astype("<f4").tobytes()


# ---------------------------------------------------------------------------
# frame / mask codecs


def decode_frame(data: bytes) -> Frame:
    """Decode PNG (or binary PPM) bytes to an 8-bit RGB frame."""
    if data[:2] == b"P6":
        return _decode_ppm(data)
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise CorruptStream(f"undecodable image stream: {exc}") from exc
    if img.mode in ("I", "I;16", "I;16B", "I;16L"):
        raise UnsupportedBitDepth(f"unsupported image mode {img.mode}")
    if img.mode != "RGB":
        img = img.convert("RGB")
    return Frame(np.asarray(img, dtype=np.uint8))


def _decode_ppm(data: bytes) -> Frame:
    # P6 header: three whitespace-separated tokens, '#' comments allowed
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise BadHeader("unterminated PPM comment")
            pos = nl + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise BadHeader("truncated PPM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise BadHeader(f"expected P6 magic, got {tokens[0]!r}")
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise BadHeader("non-numeric PPM header fields") from exc
    if maxval != 255:
        raise UnsupportedBitDepth(f"PPM maxval {maxval}, only 255 supported")
    if w < 1 or h < 1:
        raise BadHeader(f"non-positive PPM dimensions {w}x{h}")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos:]
    expected = 3 * w * h
    if len(payload) != expected:
        raise TruncatedPayload(
            f"expected {expected} PPM payload bytes, got {len(payload)}"
        )
    return Frame(np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3).copy())


def encode_frame(frame: Frame) -> bytes:
    """Encode a frame as 8-bit RGB PNG (settings pinned for reproducibility)."""
    buf = io.BytesIO()
    Image.fromarray(frame.rgb, mode="RGB").save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def decode_mask(data: bytes) -> Mask:
    """Decode a grayscale PNG mask; any nonzero sample counts as valid."""
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise CorruptStream(f"undecodable mask stream: {exc}") from exc
    if img.mode != "L":
        img = img.convert("L")
    return Mask(np.asarray(img) != 0)


def encode_mask(mask: Mask) -> bytes:
    """Encode a mask as grayscale PNG with 0/255 samples only."""
    gray = np.where(mask.bits, 255, 0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(gray, mode="L").save(buf, format="PNG", optimize=False)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# sampling


def bilinear_sample(data: FlowField | DepthMap, x: float, y: float):
    """Bilinearly interpolate a field at sub-pixel (x, y).

    Returns a (u, v) pair for flow fields and a scalar for depth maps.
    Coordinates must satisfy 0 <= x <= width-1 and 0 <= y <= height-1;
    callers clamp first.
    """
    arr = data.vectors if isinstance(data, FlowField) else data.values
    out = _bilinear_many(arr, np.asarray([x], dtype=np.float64), np.asarray([y], dtype=np.float64))[0]
    if isinstance(data, FlowField):
        return float(out[0]), float(out[1])
    return float(out)


def _bilinear_many(arr: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling; arr is (H, W) or (H, W, C)."""
    h, w = arr.shape[:2]
    if np.any(xs < 0) or np.any(xs > w - 1) or np.any(ys < 0) or np.any(ys > h - 1):
        raise OutOfBounds(f"sample outside [0,{w - 1}]x[0,{h - 1}]")
    x0 = np.clip(np.floor(xs).astype(np.intp), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(ys).astype(np.intp), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    a = arr.astype(np.float64)
    squeeze = a.ndim == 2
    if squeeze:
        a = a[:, :, None]
    top = a[y0, x0] * (1 - fx)[:, None] + a[y0, x1] * fx[:, None]
    bot = a[y1, x0] * (1 - fx)[:, None] + a[y1, x1] * fx[:, None]
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return out[:, 0] if squeeze else out


def luma_bt601(frame: Frame) -> np.ndarray:
    """ITU-R BT.601 luma as float64 in [0, 255]."""
    rgb = frame.rgb.astype(np.float64)
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]


# ---------------------------------------------------------------------------
# synthetic fixtures


def square_footprint(
    width: int, height: int, size: int, start: tuple[float, float],
    velocity: tuple[float, float], t: int,
) -> Mask:
    """Footprint mask of the moving square at frame t (rounded position)."""
    x0 = int(round(start[0] + t * velocity[0]))
    y0 = int(round(start[1] + t * velocity[1]))
    bits = np.zeros((height, width), dtype=bool)
    bits[max(y0, 0) : y0 + size, max(x0, 0) : x0 + size] = True
    return Mask(bits)


def make_synthetic(
    kind: str,
    width: int,
    height: int,
    frames: int,
    *,
    u: float = 1.0,
    v: float = 0.0,
    center: tuple[float, float] | None = None,
    omega: float = 0.1,
    size: int = 4,
    velocity: tuple[float, float] = (1.0, 1.0),
    start: tuple[float, float] = (2.0, 2.0),
    background: int = 32,
    seed: int = 0,
) -> tuple[list[FlowField], list[Frame], list[DepthMap]]:
    """Generate analytically exact fixture clips.

    ``frames`` counts flow transitions: the result holds ``frames`` flow
    fields and ``frames + 1`` video frames / depth maps, with flow t mapping
    frame t to frame t+1.

    Kinds:

    * ``uniform``  - every vector is (u, v); frames are a tiled random
      texture rolled by the rounded accumulated displacement; depth is the
      constant ``UNIFORM_DEPTH``.
    * ``rotation`` - vector at p is omega * perp(p - center) with
      perp(dx, dy) = (-dy, dx); frames are a static radial gradient.
    * ``moving_square`` - a seeded random texture square of side ``size``
      translating at ``velocity`` from ``start`` over a flat background;
      flow equals ``velocity`` inside the square footprint and zero outside;
      depth is two constant layers (square ``SQUARE_DEPTH``, background
      ``BACKGROUND_DEPTH``).
    """
    if width < 1 or height < 1 or frames < 1:
        raise BadParams("width, height and frames must be positive")
    for name, val in (("u", u), ("v", v), ("omega", omega)):
        if not np.isfinite(val):
            raise BadParams(f"non-finite parameter {name}")

    if kind == "uniform":
        return _synthetic_uniform(width, height, frames, u, v, seed)
    if kind == "rotation":
        c = center if center is not None else ((width - 1) / 2.0, (height - 1) / 2.0)
        return _synthetic_rotation(width, height, frames, c, omega)
    if kind == "moving_square":
        return _synthetic_square(
            width, height, frames, size, velocity, start, background, seed
        )
    raise BadParams(f"unknown synthetic kind {kind!r}")


def _synthetic_uniform(width, height, frames, u, v, seed):
    vec = np.empty((height, width, 2), dtype=np.float32)
    vec[:, :, 0] = u
    vec[:, :, 1] = v
    flows = [FlowField(vec.copy()) for _ in range(frames)]
    rng = np.random.default_rng(seed)
    texture = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    out_frames = []
    for t in range(frames + 1):
        dx, dy = int(round(t * u)), int(round(t * v))
        out_frames.append(Frame(np.roll(texture, shift=(dy, dx), axis=(0, 1))))
    depths = [
        DepthMap(np.full((height, width), UNIFORM_DEPTH, dtype=np.float32))
        for _ in range(frames + 1)
    ]
    return flows, out_frames, depths


def _synthetic_rotation(width, height, frames, center, omega):
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    dx = xs - center[0]
    dy = ys - center[1]
    vec = np.stack([-omega * dy, omega * dx], axis=2).astype(np.float32)
    flows = [FlowField(vec.copy()) for _ in range(frames)]
    radius = np.sqrt(dx * dx + dy * dy)
    rmax = radius.max() if radius.max() > 0 else 1.0
    shade = (radius / rmax * 255).astype(np.uint8)
    img = Frame(np.stack([shade] * 3, axis=2))
    out_frames = [Frame(img.rgb.copy()) for _ in range(frames + 1)]
    depth = (2.0 + 6.0 * radius / rmax).astype(np.float32)
    depths = [DepthMap(depth.copy()) for _ in range(frames + 1)]
    return flows, out_frames, depths


def _synthetic_square(width, height, frames, size, velocity, start, background, seed):
    if size < 1 or size > min(width, height):
        raise BadParams(f"square size {size} outside [1, min(w, h)]")
    rng = np.random.default_rng(seed)
    texture = rng.integers(64, 256, size=(size, size, 3), dtype=np.uint8)

    flows, out_frames, depths = [], [], []
    for t in range(frames + 1):
        x0 = int(round(start[0] + t * velocity[0]))
        y0 = int(round(start[1] + t * velocity[1]))
        if x0 < 0 or y0 < 0 or x0 + size > width or y0 + size > height:
            raise BadParams(
                f"square leaves the {width}x{height} frame at t={t} "
                f"(corner {x0},{y0})"
            )
        img = np.full((height, width, 3), background, dtype=np.uint8)
        img[y0 : y0 + size, x0 : x0 + size] = texture
        out_frames.append(Frame(img))
        depth = np.full((height, width), BACKGROUND_DEPTH, dtype=np.float32)
        depth[y0 : y0 + size, x0 : x0 + size] = SQUARE_DEPTH
        depths.append(DepthMap(depth))
        if t < frames:
            vec = np.zeros((height, width, 2), dtype=np.float32)
            vec[y0 : y0 + size, x0 : x0 + size] = velocity
            flows.append(FlowField(vec))
    return flows, out_frames, depths
