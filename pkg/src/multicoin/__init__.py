"""Control synthesis and evaluation toolkit for keyframe video inbetweening.

The package turns sparse user intent (trajectories with optional depth,
target regions, keyframes) into the dense conditioning artifacts a latent
video diffusion backbone consumes, and scores generated output for motion
adherence and frame quality.
"""

from .controls import (
    AnchorSet,
    ControlClip,
    SplatConfig,
    depth_anchors,
    load_control_clip,
    render_control_clip,
    save_control_clip,
    splat_depth_disk,
    splat_flow_gaussian,
)
from .errors import MulticoinError
from .latent_pack import (
    BranchManifest,
    CurriculumManifest,
    LatentLayout,
    VaeLayoutConfig,
    branch_manifest,
    condition_dropout,
    curriculum_manifest,
    diffusion_loss,
    latent_layout,
)
from .media_io import (
    DepthMap,
    FlowField,
    Frame,
    Mask,
    bilinear_sample,
    decode_flo,
    decode_frame,
    decode_mask,
    decode_pfm,
    encode_flo,
    encode_frame,
    encode_mask,
    encode_pfm,
    make_synthetic,
)
from .metrics import MotionReport, Polyline, frechet_distance, motion_metric, ssim
from .regions import (
    AugmentedClip,
    RegionSpec,
    compose_augmented_clip,
    load_augmented_clip,
    save_augmented_clip,
    segment_region,
    translate_region,
)
from .trajectory import (
    KeyframePlan,
    Trajectory,
    TrajectorySet,
    attach_depth,
    auto_trajectory,
    sample_keyframes,
    select_seeds,
    to_manifest,
    track_points,
)
from .visualize import (
    DepthColorConfig,
    FlowColorConfig,
    depth_to_rgb,
    flow_to_rgb,
    rgb_to_depth,
    rgb_to_flow,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorSet",
    "AugmentedClip",
    "BranchManifest",
    "ControlClip",
    "CurriculumManifest",
    "DepthColorConfig",
    "DepthMap",
    "FlowColorConfig",
    "FlowField",
    "Frame",
    "KeyframePlan",
    "LatentLayout",
    "Mask",
    "MotionReport",
    "MulticoinError",
    "Polyline",
    "RegionSpec",
    "SplatConfig",
    "Trajectory",
    "TrajectorySet",
    "VaeLayoutConfig",
    "attach_depth",
    "auto_trajectory",
    "bilinear_sample",
    "branch_manifest",
    "compose_augmented_clip",
    "condition_dropout",
    "curriculum_manifest",
    "decode_flo",
    "decode_frame",
    "decode_mask",
    "decode_pfm",
    "depth_anchors",
    "depth_to_rgb",
    "diffusion_loss",
    "encode_flo",
    "encode_frame",
    "encode_mask",
    "encode_pfm",
    "flow_to_rgb",
    "frechet_distance",
    "latent_layout",
    "load_augmented_clip",
    "load_control_clip",
    "make_synthetic",
    "motion_metric",
    "render_control_clip",
    "rgb_to_depth",
    "rgb_to_flow",
    "sample_keyframes",
    "save_augmented_clip",
    "save_control_clip",
    "segment_region",
    "select_seeds",
    "splat_depth_disk",
    "splat_flow_gaussian",
    "ssim",
    "to_manifest",
    "track_points",
    "translate_region",
]
