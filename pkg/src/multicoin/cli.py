"""Command-line surface for the control-synthesis and evaluation toolkit.

Exit codes: 0 success, 1 usage error, 2 data error. Every failure prints a
single diagnostic to stderr prefixed with "error:". All commands are
deterministic for a fixed --seed, and JSON artifacts use sorted keys with
stable indentation so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import controls, latent_pack, media_io, metrics, regions, trajectory, visualize
from .errors import BadParams, EmptyInput, LengthMismatch, MulticoinError
from .jsonio import canonical_json, write_json


class UsageError(Exception):
    """Bad argv: wrong flags, malformed values, missing subcommand."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argv value parsers


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        w, h = int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}")
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"size must be positive, got {text!r}")
    return w, h


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(",")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")


def _pair_list(text: str) -> list[tuple[float, float]]:
    parts = [part for part in text.split(";") if part]
    if not parts:
        raise argparse.ArgumentTypeError("empty seed list")
    return [_pair(part) for part in parts]


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# ---------------------------------------------------------------------------
# shared input helpers


def _read_flow_dir(path) -> list[media_io.FlowField]:
    files = sorted(Path(path).glob("*.flo"))
    if not files:
        raise EmptyInput(f"no .flo files in {path}")
    return [media_io.decode_flo(f.read_bytes()) for f in files]


def _read_depth_dir(path) -> list[media_io.DepthMap]:
    files = sorted(Path(path).glob("*.pfm"))
    if not files:
        raise EmptyInput(f"no .pfm files in {path}")
    return [media_io.decode_pfm(f.read_bytes()) for f in files]


def _read_frame_dir(path) -> list[media_io.Frame]:
    files = sorted(Path(path).glob("*.png"))
    if not files:
        raise EmptyInput(f"no .png files in {path}")
    return [media_io.decode_frame(f.read_bytes()) for f in files]


def _load_manifest(path) -> trajectory.TrajectorySet:
    try:
        return trajectory.load_manifest(path)
    except ValueError as exc:
        raise BadParams(f"manifest {path} is not valid JSON: {exc}") from exc


def _emit_json(obj: dict, out: str | None) -> None:
    if out:
        write_json(obj, out)
    else:
        sys.stdout.write(canonical_json(obj))


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_synth(args) -> None:
    flows, frames, depths = media_io.make_synthetic(
        args.kind,
        args.size[0],
        args.size[1],
        args.frames,
        u=args.u,
        v=args.v,
        center=args.center,
        omega=args.omega,
        size=args.square_size,
        velocity=args.velocity,
        start=args.start,
        background=args.background,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(flows):
        (out / f"flow_{i:04d}.flo").write_bytes(media_io.encode_flo(f))
    for i, fr in enumerate(frames):
        (out / f"frame_{i:04d}.png").write_bytes(media_io.encode_frame(fr))
    for i, d in enumerate(depths):
        (out / f"depth_{i:04d}.pfm").write_bytes(media_io.encode_pfm(d))


def _cmd_viz_flow(args) -> None:
    flow = media_io.decode_flo(Path(args.flow).read_bytes())
    cfg = visualize.FlowColorConfig(mag_max=args.mag_max)
    Path(args.out).write_bytes(media_io.encode_frame(visualize.flow_to_rgb(flow, cfg)))


def _cmd_viz_depth(args) -> None:
    depth = media_io.decode_pfm(Path(args.depth).read_bytes())
    if args.d_ref is not None and args.d_scale is not None:
        cfg = visualize.DepthColorConfig(d_ref=args.d_ref, d_scale=args.d_scale)
    elif args.d_ref is None and args.d_scale is None:
        cfg = visualize.depth_cfg_from_values(depth.values.ravel())
    else:
        raise UsageError("give both --d-ref and --d-scale or neither")
    Path(args.out).write_bytes(media_io.encode_frame(visualize.depth_to_rgb(depth, cfg)))


def _cmd_track(args) -> None:
    flows = _read_flow_dir(args.flows)
    if args.seeds is not None:
        seeds = args.seeds
    else:
        seeds = trajectory.select_seeds(flows[0], k=args.auto, min_sep=args.min_sep)
    traj = trajectory.track_points(flows, seeds)
    if args.depths:
        traj = trajectory.attach_depth(traj, _read_depth_dir(args.depths))
    _emit_json(trajectory.to_manifest(traj), args.out)


def _cmd_auto_traj(args) -> None:
    first = media_io.decode_frame(Path(args.first).read_bytes())
    last = media_io.decode_frame(Path(args.last).read_bytes())
    cfg = trajectory.AutoTrajectoryConfig(
        frame_count=args.frames,
        threshold=args.threshold,
        max_corners=args.max_corners,
    )
    traj = trajectory.auto_trajectory(first, last, args.max_pairs, cfg)
    _emit_json(trajectory.to_manifest(traj), args.out)


def _build_anchors(traj, args) -> controls.AnchorSet | None:
    if args.no_anchors:
        return None
    samples = traj.depth_samples()
    if not samples.size:
        return None
    return controls.depth_anchors(
        samples, traj.width, traj.height, inset=args.radius
    )


def _cmd_render_controls(args) -> None:
    traj = _load_manifest(args.manifest)
    splat_cfg = controls.SplatConfig(
        sigma=args.sigma, truncate=args.truncate, disk_radius=args.radius
    )
    flow_cfg = visualize.FlowColorConfig(mag_max=args.mag_max)
    clip = controls.render_control_clip(
        traj,
        args.frames if args.frames is not None else traj.frame_count,
        anchors=_build_anchors(traj, args),
        splat_cfg=splat_cfg,
        flow_cfg=flow_cfg,
    )
    controls.save_control_clip(clip, args.out)


def _cmd_segment_region(args) -> None:
    flow = media_io.decode_flo(Path(args.flow).read_bytes())
    mask = regions.segment_region(flow, args.anchor, threshold_frac=args.frac)
    Path(args.out).write_bytes(media_io.encode_mask(mask))


def _cmd_augment(args) -> None:
    first = media_io.decode_frame(Path(args.first).read_bytes())
    last = media_io.decode_frame(Path(args.last).read_bytes())
    keyframes = [(0, first), (args.length - 1, last)]
    targets = []
    if args.region_mask:
        if args.manifest is None or args.anchor is None:
            raise UsageError("--region-mask needs --manifest and --anchor")
        traj_set = _load_manifest(args.manifest)
        if args.traj_id is not None:
            matches = [tr for tr in traj_set.trajectories if tr.id == args.traj_id]
            if not matches:
                raise BadParams(f"manifest has no trajectory with id {args.traj_id}")
            traj = matches[0]
        else:
            if not traj_set.trajectories:
                raise BadParams("manifest has no trajectories")
            traj = traj_set.trajectories[0]
        if args.region_source == 0:
            keyframe = first
        elif args.region_source == args.length - 1:
            keyframe = last
        else:
            raise BadParams(
                f"region source frame {args.region_source} is not a keyframe slot"
            )
        spec = regions.RegionSpec(
            mask=media_io.decode_mask(Path(args.region_mask).read_bytes()),
            source_frame=args.region_source,
            anchor=args.anchor,
        )
        times = (
            args.targets
            if args.targets
            else regions.default_target_times(args.length, args.target_count)
        )
        placed = regions.translate_region(keyframe, spec, traj, times)
        targets = [(t, fr, mk) for t, (fr, mk) in zip(times, placed)]
    clip = regions.compose_augmented_clip(keyframes, targets, args.length)
    if args.dropout_p is not None:
        clip = latent_pack.condition_dropout(clip, p=args.dropout_p, rng_seed=args.seed)
    regions.save_augmented_clip(clip, args.out)


def _cmd_layout(args) -> None:
    cfg = latent_pack.VaeLayoutConfig(
        temporal_factor=args.temporal_factor,
        spatial_factor=args.spatial_factor,
        latent_channels=args.channels,
        causal_first_frame=not args.no_causal,
        patch_size=args.patch_size,
    )
    layout = latent_pack.latent_layout(args.frames, args.size[1], args.size[0], cfg)
    branches = latent_pack.branch_manifest(layout, cfg, embed_dim=args.embed_dim)
    obj = layout.to_json_obj()
    obj["branches"] = branches.to_json_obj()
    _emit_json(obj, args.out)


def _cmd_curriculum(args) -> None:
    manifest = latent_pack.curriculum_manifest(args.steps)
    _emit_json(manifest.to_json_obj(), args.out)


def _cmd_eval_motion(args) -> None:
    traj = _load_manifest(args.manifest)
    flows = _read_flow_dir(args.flows)
    report = metrics.motion_metric(traj, flows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(report.to_json_obj(), out / "report.json")
    from . import report as figures

    figures.write_motion_csv(report, out / "motion.csv")
    figures.write_motion_figure(traj, flows, out / "motion.png")
    sys.stdout.write(canonical_json(report.to_json_obj()))


def _cmd_eval_ssim(args) -> None:
    frames_a = _read_frame_dir(args.a)
    frames_b = _read_frame_dir(args.b)
    if len(frames_a) != len(frames_b):
        raise LengthMismatch(
            f"{len(frames_a)} frames in {args.a} vs {len(frames_b)} in {args.b}"
        )
    values, mean = metrics.ssim_sequence(frames_a, frames_b)
    obj = {"ssim_per_frame": values, "ssim_mean": mean}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(obj, out / "report.json")
    from . import report as figures

    figures.write_ssim_csv(values, mean, out / "ssim.csv")
    figures.write_ssim_figure(values, out / "ssim.png")
    sys.stdout.write(canonical_json(obj))


def _cmd_serve(args) -> None:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.partition(":")
    if not port:
        raise UsageError(f"expected HOST:PORT, got {args.bind!r}")
    app = create_app(ttl_seconds=args.ttl, ui_dir=args.ui)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


# ---------------------------------------------------------------------------
# parser wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="multicoin", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("synth", parents=[], help="write synthetic fixture clips")
    p.add_argument("--kind", required=True, choices=["uniform", "rotation", "moving_square"])
    p.add_argument("--size", required=True, type=_size)
    p.add_argument("--frames", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--v", type=float, default=0.0)
    p.add_argument("--center", type=_pair, default=None)
    p.add_argument("--omega", type=float, default=0.1)
    p.add_argument("--square-size", type=int, default=4)
    p.add_argument("--velocity", type=_pair, default=(1.0, 1.0))
    p.add_argument("--start", type=_pair, default=(2.0, 2.0))
    p.add_argument("--background", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("viz-flow", help="encode a .flo field as a color PNG")
    p.add_argument("--flow", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mag-max", type=float, default=20.0)
    p.set_defaults(func=_cmd_viz_flow)

    p = sub.add_parser("viz-depth", help="encode a PFM depth map as a color PNG")
    p.add_argument("--depth", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--d-ref", type=float, default=None)
    p.add_argument("--d-scale", type=float, default=None)
    p.set_defaults(func=_cmd_viz_depth)

    p = sub.add_parser("track", help="advect seed points through a flow directory")
    p.add_argument("--flows", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seeds", type=_pair_list, default=None)
    p.add_argument("--auto", type=int, default=8, help="auto-seed count when --seeds absent")
    p.add_argument("--min-sep", type=float, default=16.0)
    p.add_argument("--depths", default=None, help="PFM directory for per-point depth")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("auto-traj", help="corner-matched trajectories between two frames")
    p.add_argument("--first", required=True)
    p.add_argument("--last", required=True)
    p.add_argument("--frames", required=True, type=int)
    p.add_argument("--out", default=None)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--max-corners", type=int, default=64)
    p.add_argument("--max-pairs", type=int, default=64)
    p.set_defaults(func=_cmd_auto_traj)

    p = sub.add_parser("render-controls", help="render sparse flow/depth control frames")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--sigma", type=float, default=10.0)
    p.add_argument("--truncate", type=float, default=3.0)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--mag-max", type=float, default=20.0)
    p.add_argument("--no-anchors", action="store_true")
    p.set_defaults(func=_cmd_render_controls)

    p = sub.add_parser("segment-region", help="flow-magnitude component around an anchor")
    p.add_argument("--flow", required=True)
    p.add_argument("--anchor", required=True, type=_pair)
    p.add_argument("--out", required=True)
    p.add_argument("--frac", type=float, default=0.5)
    p.set_defaults(func=_cmd_segment_region)

    p = sub.add_parser("augment", help="compose a slotted keyframe/target clip")
    p.add_argument("--first", required=True)
    p.add_argument("--last", required=True)
    p.add_argument("--length", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--region-mask", default=None)
    p.add_argument("--region-source", type=int, default=0)
    p.add_argument("--anchor", type=_pair, default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--traj-id", type=int, default=None)
    p.add_argument("--targets", type=_int_list, default=None)
    p.add_argument("--target-count", type=int, default=2)
    p.add_argument("--dropout-p", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("layout", help="latent token layout and branch widths")
    p.add_argument("--frames", required=True, type=int)
    p.add_argument("--size", required=True, type=_size)
    p.add_argument("--out", default=None)
    p.add_argument("--embed-dim", type=int, default=1024)
    p.add_argument("--temporal-factor", type=int, default=8)
    p.add_argument("--spatial-factor", type=int, default=8)
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--patch-size", type=int, default=2)
    p.add_argument("--no-causal", action="store_true")
    p.set_defaults(func=_cmd_layout)

    p = sub.add_parser("curriculum", help="staged training schedule manifest")
    p.add_argument("--out", default=None)
    p.add_argument(
        "--steps", type=_int_list, default=list(latent_pack.DEFAULT_STAGE_STEPS)
    )
    p.set_defaults(func=_cmd_curriculum)

    p = sub.add_parser("eval-motion", help="trajectory adherence report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--flows", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval_motion)

    p = sub.add_parser("eval-ssim", help="per-frame structural similarity report")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval_ssim)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8787")
    p.add_argument("--ttl", type=float, default=3600.0)
    p.add_argument("--ui", default=None, help="static directory mounted at /")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("a subcommand is required (see --help)")
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MulticoinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
