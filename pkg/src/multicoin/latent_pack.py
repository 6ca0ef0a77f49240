"""Layout arithmetic for a latent-video diffusion backbone.

Nothing here runs a network. The module computes the bookkeeping that a
causal 3D VAE plus patchifying transformer imposes on clip shapes: latent
frame/row/column counts, token counts, channel widths of the two
conditioning branches, the staged training schedule, keyframe-content
dropout, and the plain MSE training loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, IndivisibleDims, ShapeMismatch
from .media_io import Frame, Mask
from .regions import AugmentedClip

STAGE_NAMES = ("interpolation", "dense_motion", "sparse_motion", "target_regions")
DEFAULT_STAGE_STEPS = (5000, 2000, 2000, 2000)

# conditions switched on at each stage; later stages keep all earlier ones
_STAGE_NEW_CONDITIONS = (
    ("keyframes",),
    ("dense_flow", "dense_depth"),
    ("sparse_flow_points", "sparse_depth_points"),
    ("target_regions",),
)


@dataclass(frozen=True)
class VaeLayoutConfig:
    """Compression factors of the video VAE and the patch embedder."""

    temporal_factor: int = 8
    spatial_factor: int = 8
    latent_channels: int = 16
    causal_first_frame: bool = True
    patch_size: int = 2

    def __post_init__(self):
        for name in ("temporal_factor", "spatial_factor", "latent_channels", "patch_size"):
            if getattr(self, name) < 1:
                raise BadParams(f"{name} must be >= 1")


@dataclass(frozen=True)
class LatentLayout:
    latent_T: int
    latent_H: int
    latent_W: int
    tokens_per_frame: int

    @property
    def total_tokens(self) -> int:
        return self.latent_T * self.tokens_per_frame

    def to_json_obj(self) -> dict:
        return {
            "latent_frames": self.latent_T,
            "latent_height": self.latent_H,
            "latent_width": self.latent_W,
            "tokens_per_frame": self.tokens_per_frame,
            "total_tokens": self.total_tokens,
        }


@dataclass(frozen=True)
class BranchManifest:
    """Channel/token widths of the content and motion conditioning branches."""

    content_in_channels: int
    motion_in_channels: int
    tokens_per_branch: int
    fused_width: int
    final_width: int

    def to_json_obj(self) -> dict:
        return {
            "content_in_channels": self.content_in_channels,
            "motion_in_channels": self.motion_in_channels,
            "tokens_per_branch": self.tokens_per_branch,
            "fused_width": self.fused_width,
            "final_width": self.final_width,
        }


def latent_layout(frames: int, height: int, width: int, cfg: VaeLayoutConfig | None = None) -> LatentLayout:
    """Pixel clip shape to latent token layout.

    The first frame passes through uncompressed when the VAE is causal, so
    latent_T = 1 + ceil((T-1)/temporal_factor); otherwise ceil(T/factor).
    """
    cfg = cfg or VaeLayoutConfig()
    if frames < 1:
        raise BadParams("frame count must be >= 1")
    grid = cfg.spatial_factor * cfg.patch_size
    if height % grid or width % grid:
        raise IndivisibleDims(
            f"{width}x{height} not divisible by spatial_factor*patch_size = {grid}"
        )
    if cfg.causal_first_frame:
        latent_t = 1 + math.ceil((frames - 1) / cfg.temporal_factor)
    else:
        latent_t = math.ceil(frames / cfg.temporal_factor)
    lat_h = height // cfg.spatial_factor
    lat_w = width // cfg.spatial_factor
    tokens = (lat_h // cfg.patch_size) * (lat_w // cfg.patch_size)
    return LatentLayout(latent_T=latent_t, latent_H=lat_h, latent_W=lat_w, tokens_per_frame=tokens)


def branch_manifest(layout: LatentLayout, cfg: VaeLayoutConfig | None = None, embed_dim: int = 1024) -> BranchManifest:
    """Channel arithmetic of the dual conditioning branches.

    Content branch stacks noise latents, content latents, and one mask
    channel; motion branch stacks flow and depth latents. Both patchify to
    the same token count; their embeddings concatenate to 2*embed_dim and a
    final linear stage brings the width back to embed_dim.
    """
    cfg = cfg or VaeLayoutConfig()
    if embed_dim < 1:
        raise BadParams("embed_dim must be >= 1")
    c = cfg.latent_channels
    return BranchManifest(
        content_in_channels=2 * c + 1,
        motion_in_channels=2 * c,
        tokens_per_branch=layout.total_tokens,
        fused_width=2 * embed_dim,
        final_width=embed_dim,
    )


def condition_dropout(clip: AugmentedClip, p: float = 0.5, rng_seed: int = 0) -> AugmentedClip:
    """Randomly drop the target-region content condition.

    One Bernoulli(p) draw per seed decides whether every target slot is
    replaced by a black frame with a zero mask; keyframes are never touched.
    """
    if not 0.0 <= p <= 1.0:
        raise BadParams("dropout probability must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    if not (rng.random() < p) or not clip.target_positions:
        return AugmentedClip(
            frames=list(clip.frames),
            masks=list(clip.masks),
            keyframe_positions=list(clip.keyframe_positions),
            target_positions=list(clip.target_positions),
        )
    h, w = clip.frames[0].height, clip.frames[0].width
    frames = list(clip.frames)
    masks = list(clip.masks)
    for i in clip.target_positions:
        frames[i] = Frame(np.zeros((h, w, 3), dtype=np.uint8))
        masks[i] = Mask(np.zeros((h, w), dtype=bool))
    return AugmentedClip(
        frames=frames,
        masks=masks,
        keyframe_positions=list(clip.keyframe_positions),
        target_positions=[],
    )


@dataclass(frozen=True)
class CurriculumStage:
    name: str
    enabled_conditions: tuple[str, ...]
    steps: int
    content_dropout_p: float


@dataclass(frozen=True)
class CurriculumManifest:
    stages: tuple[CurriculumStage, ...]

    def to_json_obj(self) -> dict:
        return {
            "stages": [
                {
                    "name": s.name,
                    "enabled_conditions": list(s.enabled_conditions),
                    "steps": s.steps,
                    "content_dropout_p": s.content_dropout_p,
                }
                for s in self.stages
            ]
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "CurriculumManifest":
        try:
            stages = tuple(
                CurriculumStage(
                    name=str(s["name"]),
                    enabled_conditions=tuple(str(c) for c in s["enabled_conditions"]),
                    steps=int(s["steps"]),
                    content_dropout_p=float(s["content_dropout_p"]),
                )
                for s in obj["stages"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadParams(f"malformed curriculum manifest: {exc}") from exc
        return cls(stages=stages)


def curriculum_manifest(stage_steps=DEFAULT_STAGE_STEPS) -> CurriculumManifest:
    """Four-stage training schedule with monotonically growing conditions.

    Stages run interpolation, dense motion, sparse motion, target regions;
    each keeps every earlier condition, and only the final stage applies
    content dropout (p=0.5).
    """
    steps = tuple(int(s) for s in stage_steps)
    if len(steps) != len(STAGE_NAMES):
        raise BadParams(f"expected {len(STAGE_NAMES)} stage step counts, got {len(steps)}")
    if any(s < 1 for s in steps):
        raise BadParams("stage steps must be positive")
    stages = []
    acc: tuple[str, ...] = ()
    for i, name in enumerate(STAGE_NAMES):
        acc = acc + _STAGE_NEW_CONDITIONS[i]
        stages.append(
            CurriculumStage(
                name=name,
                enabled_conditions=acc,
                steps=steps[i],
                content_dropout_p=0.5 if i == len(STAGE_NAMES) - 1 else 0.0,
            )
        )
    return CurriculumManifest(stages=tuple(stages))


def diffusion_loss(eps_hat, eps) -> float:
    """Mean squared error between predicted and true noise grids."""
    a = np.asarray(eps_hat, dtype=np.float64)
    b = np.asarray(eps, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape {a.shape} vs {b.shape}")
    if a.size == 0:
        raise BadParams("empty grids")
    return float(np.mean((a - b) ** 2))
