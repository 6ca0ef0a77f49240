"""HTTP facade over trajectory, control, region, and metric pipelines.

Stateless by construction: every endpoint is a pure function of the
uploaded assets plus the request body, and asset ids are content hashes,
so repeating any request returns byte-identical payloads. Assets live in
an in-memory store and expire after a TTL.
"""

from __future__ import annotations

import hashlib
import threading
import time
from pathlib import Path

from fastapi import FastAPI, File, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import controls, media_io, metrics, regions, trajectory, visualize
from .errors import BadParams, MulticoinError
from .jsonio import canonical_json

MAX_UPLOAD_BYTES = 32 * 1024 * 1024
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class UnknownAsset(MulticoinError):
    """Asset id absent from the store (never uploaded or expired)."""


class AssetStore:
    """Content-addressed byte store with per-asset expiry.

    Ids are truncated SHA-256 digests, so storing identical bytes twice
    yields the same id and the store stays safe under concurrent use.
    """

    def __init__(self, ttl_seconds: float = 3600.0):
        if ttl_seconds <= 0:
            raise BadParams("ttl must be positive")
        self.ttl = ttl_seconds
        self._lock = threading.Lock()
        self._items: dict[str, tuple[bytes, float]] = {}

    def put(self, data: bytes) -> str:
        asset_id = hashlib.sha256(data).hexdigest()[:16]
        now = time.monotonic()
        with self._lock:
            self._sweep(now)
            self._items[asset_id] = (data, now + self.ttl)
        return asset_id

    def get(self, asset_id: str) -> bytes:
        now = time.monotonic()
        with self._lock:
            self._sweep(now)
            entry = self._items.get(asset_id)
            if entry is None:
                raise UnknownAsset(f"unknown asset {asset_id!r}")
            data, _expiry = entry
            self._items[asset_id] = (data, now + self.ttl)
        return data

    def _sweep(self, now: float) -> None:
        dead = [k for k, (_, expiry) in self._items.items() if expiry <= now]
        for k in dead:
            del self._items[k]


def _json_response(obj: dict, status: int = 200) -> Response:
    return Response(
        content=canonical_json(obj).encode("utf-8"),
        status_code=status,
        media_type="application/json",
    )


async def _body(request: Request) -> dict:
    try:
        payload = await request.json()
    except ValueError as exc:
        raise BadParams(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise BadParams("request body must be a JSON object")
    return payload


def _require(payload: dict, key: str):
    if key not in payload:
        raise BadParams(f"missing required field {key!r}")
    return payload[key]


def _field_float(payload: dict, key: str, default: float) -> float:
    try:
        return float(payload.get(key, default))
    except (TypeError, ValueError) as exc:
        raise BadParams(f"field {key!r} must be a number") from exc


def _field_int(payload: dict, key: str, default: int | None = None) -> int:
    value = payload.get(key, default) if default is not None else _require(payload, key)
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise BadParams(f"field {key!r} must be an integer") from exc


def _anchor_pair(value) -> tuple[float, float]:
    try:
        x, y = value
        return float(x), float(y)
    except (TypeError, ValueError) as exc:
        raise BadParams("anchor must be an [x, y] pair") from exc


def create_app(ttl_seconds: float = 3600.0, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="multicoin", docs_url=None, redoc_url=None)
    store = AssetStore(ttl_seconds)
    app.state.store = store

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(MulticoinError)
    async def _domain_error(request, exc):
        status = 404 if isinstance(exc, UnknownAsset) else 400
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request, exc):
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc.detail)})

    def _store_png_urls(blobs: list[bytes]) -> list[str]:
        return [f"/api/assets/{store.put(b)}" for b in blobs]

    def _asset_flow(asset_id: str) -> media_io.FlowField:
        return media_io.decode_flo(store.get(asset_id))

    def _asset_frame(asset_id: str) -> media_io.Frame:
        return media_io.decode_frame(store.get(asset_id))

    def _manifest_from(payload: dict) -> trajectory.TrajectorySet:
        manifest = _require(payload, "manifest")
        if not isinstance(manifest, dict):
            raise BadParams("manifest must be a JSON object")
        return trajectory.from_manifest(manifest)

    @app.get("/api/health")
    async def health():
        return _json_response({"ok": True})

    @app.post("/api/assets")
    async def upload(file: UploadFile = File(...)):
        data = await file.read()
        if len(data) > MAX_UPLOAD_BYTES:
            return JSONResponse(
                status_code=413,
                content={"error": f"upload exceeds {MAX_UPLOAD_BYTES} bytes"},
            )
        return _json_response({"id": store.put(data)})

    @app.get("/api/assets/{asset_id}")
    async def fetch(asset_id: str):
        data = store.get(asset_id)
        media = "image/png" if data.startswith(PNG_MAGIC) else "application/octet-stream"
        return Response(content=data, media_type=media)

    @app.post("/api/trajectory/auto")
    async def trajectory_auto(request: Request):
        payload = await _body(request)
        first = _asset_frame(str(_require(payload, "first")))
        last = _asset_frame(str(_require(payload, "last")))
        cfg = trajectory.AutoTrajectoryConfig(
            frame_count=_field_int(payload, "frames"),
            threshold=_field_float(payload, "threshold", 0.8),
        )
        traj = trajectory.auto_trajectory(
            first, last, _field_int(payload, "max_pairs", 64), cfg
        )
        return _json_response(trajectory.to_manifest(traj))

    @app.post("/api/controls/render")
    async def controls_render(request: Request):
        payload = await _body(request)
        traj = _manifest_from(payload)
        cfg = payload.get("cfg", {})
        if not isinstance(cfg, dict):
            raise BadParams("cfg must be a JSON object")
        splat_cfg = controls.SplatConfig(
            sigma=_field_float(cfg, "sigma", 10.0),
            truncate=_field_float(cfg, "truncate", 3.0),
            disk_radius=_field_float(cfg, "disk_radius", 10.0),
        )
        flow_cfg = visualize.FlowColorConfig(
            mag_max=_field_float(cfg, "mag_max", 20.0)
        )
        anchors = None
        if cfg.get("anchors", True):
            samples = traj.depth_samples()
            if samples.size:
                anchors = controls.depth_anchors(
                    samples, traj.width, traj.height, inset=splat_cfg.disk_radius
                )
        clip = controls.render_control_clip(
            traj,
            _field_int(cfg, "frames", traj.frame_count),
            anchors=anchors,
            splat_cfg=splat_cfg,
            flow_cfg=flow_cfg,
        )
        return _json_response(
            {
                "flow": _store_png_urls([media_io.encode_frame(f) for f in clip.flow_frames]),
                "depth": _store_png_urls([media_io.encode_frame(f) for f in clip.depth_frames]),
            }
        )

    @app.post("/api/region/segment")
    async def region_segment(request: Request):
        payload = await _body(request)
        flow = _asset_flow(str(_require(payload, "flow")))
        anchor = _anchor_pair(_require(payload, "anchor"))
        frac = _field_float(payload, "threshold_frac", 0.5)
        mask = regions.segment_region(flow, anchor, threshold_frac=frac)
        url = _store_png_urls([media_io.encode_mask(mask)])[0]
        return _json_response({"mask": url})

    @app.post("/api/augment")
    async def augment(request: Request):
        payload = await _body(request)
        first = _asset_frame(str(_require(payload, "first")))
        last = _asset_frame(str(_require(payload, "last")))
        length = _field_int(payload, "length")
        keyframes = [(0, first), (length - 1, last)]
        targets = []
        region = payload.get("region")
        if region is not None:
            if not isinstance(region, dict):
                raise BadParams("region must be a JSON object")
            traj_set = _manifest_from(payload)
            traj_id = region.get("traj_id")
            if traj_id is not None:
                matches = [tr for tr in traj_set.trajectories if tr.id == int(traj_id)]
                if not matches:
                    raise BadParams(f"manifest has no trajectory with id {traj_id}")
                traj = matches[0]
            else:
                if not traj_set.trajectories:
                    raise BadParams("manifest has no trajectories")
                traj = traj_set.trajectories[0]
            source = _field_int(region, "source_frame", 0)
            if source == 0:
                keyframe = first
            elif source == length - 1:
                keyframe = last
            else:
                raise BadParams(f"region source frame {source} is not a keyframe slot")
            spec = regions.RegionSpec(
                mask=media_io.decode_mask(store.get(str(_require(region, "mask")))),
                source_frame=source,
                anchor=_anchor_pair(_require(region, "anchor")),
            )
            times = region.get("targets")
            if times is None:
                times = regions.default_target_times(
                    length, _field_int(region, "target_count", 2)
                )
            else:
                times = [int(t) for t in times]
            placed = regions.translate_region(keyframe, spec, traj, times)
            targets = [(t, fr, mk) for t, (fr, mk) in zip(times, placed)]
        clip = regions.compose_augmented_clip(keyframes, targets, length)
        return _json_response(
            {
                "frames": _store_png_urls([media_io.encode_frame(f) for f in clip.frames]),
                "masks": _store_png_urls([media_io.encode_mask(m) for m in clip.masks]),
                "slots": {
                    "length": clip.length,
                    "keyframes": clip.keyframe_positions,
                    "targets": clip.target_positions,
                },
            }
        )

    @app.post("/api/metrics/motion")
    async def metrics_motion(request: Request):
        payload = await _body(request)
        traj = _manifest_from(payload)
        flow_ids = _require(payload, "flows")
        if not isinstance(flow_ids, list):
            raise BadParams("flows must be a list of asset ids")
        flows = [_asset_flow(str(i)) for i in flow_ids]
        report = metrics.motion_metric(traj, flows)
        return _json_response(report.to_json_obj())

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=Path(ui_dir), html=True), name="ui")

    return app
