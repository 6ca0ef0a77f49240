// DOM bootstrap: wires the editable scene, the service client, and the
// preview timeline together. All pixel work happens server side; this
// file only routes gestures and displays returned assets.

import { ApiClient, RenderResponse, AugmentResponse, ServiceError } from "./api.js";
import { drawScene, regionMaskCanvas } from "./draw.js";
import { canonicalizeText, parseManifest, ManifestError } from "./manifest.js";
import {
  CanvasScene,
  DEFAULT_DEPTH,
  appendPoint,
  enableDepth,
  exportScene,
  hitTest,
  movePoint,
  newScene,
  regionAnchor,
  removeTrajectory,
  sceneFromManifest,
  sceneProblems,
  setPointDepth,
  setPreviewFrame,
  setRegion,
  setTargets,
  startTrajectory,
} from "./scene.js";
import { PreviewQueue } from "./preview.js";

const CANVAS_SCALE = 6;
const HIT_RADIUS = 2.5;

type Tool = "draw" | "drag" | "region";

interface PreviewState {
  render: RenderResponse | null;
  augment: AugmentResponse | null;
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function setStatus(text: string, isError = false): void {
  const el = byId<HTMLDivElement>("status");
  el.textContent = text;
  el.className = isError ? "status error" : "status";
}

function downloadText(name: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.click();
  URL.revokeObjectURL(url);
}

async function fileToImage(file: File): Promise<HTMLImageElement> {
  const url = URL.createObjectURL(file);
  try {
    const img = new Image();
    img.src = url;
    await img.decode();
    return img;
  } finally {
    URL.revokeObjectURL(url);
  }
}

function main(): void {
  let scene: CanvasScene = newScene(64, 64, 8);
  let tool: Tool = "draw";
  let online = false;
  let firstImage: HTMLImageElement | null = null;
  let drag: { id: number; index: number } | null = null;
  let rubber: { x0: number; y0: number } | null = null;
  let preview: PreviewState = { render: null, augment: null };
  const queue = new PreviewQueue<PreviewState>();

  const client = () => new ApiClient(byId<HTMLInputElement>("server").value);
  const canvas = byId<HTMLCanvasElement>("editor");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");

  function resizeCanvas(): void {
    canvas.width = scene.width * CANVAS_SCALE;
    canvas.height = scene.height * CANVAS_SCALE;
  }

  function redraw(): void {
    drawScene(ctx!, scene, firstImage, CANVAS_SCALE);
    const problems = sceneProblems(scene);
    byId<HTMLButtonElement>("export").disabled = problems.length > 0;
    byId<HTMLButtonElement>("preview").disabled = !online;
    byId<HTMLDivElement>("problems").textContent = problems.join("; ");
  }

  function showPreviewFrame(): void {
    const idx = scene.previewFrame;
    const cl = client();
    const setImg = (id: string, urls: string[] | null) => {
      const img = byId<HTMLImageElement>(id);
      if (urls && idx < urls.length) {
        img.src = cl.url(urls[idx]);
        img.style.visibility = "visible";
      } else {
        img.style.visibility = "hidden";
      }
    };
    setImg("view-flow", preview.render ? preview.render.flow : null);
    setImg("view-depth", preview.render ? preview.render.depth : null);
    setImg("view-frame", preview.augment ? preview.augment.frames : null);
    setImg("view-mask", preview.augment ? preview.augment.masks : null);
    byId<HTMLSpanElement>("frame-label").textContent = `frame ${idx}`;
  }

  async function refreshHealth(): Promise<void> {
    online = await client().health();
    byId<HTMLDivElement>("offline").style.display = online ? "none" : "block";
    redraw();
  }

  async function runPreview(): Promise<void> {
    const problems = sceneProblems(scene);
    if (problems.length > 0) {
      setStatus(problems[0], true);
      return;
    }
    const snapshot = scene;
    const cl = client();
    setStatus("rendering preview...");
    try {
      const result = await queue.submit(async (): Promise<PreviewState> => {
        const manifest = parseManifest(exportScene(snapshot));
        const render = await cl.renderControls(manifest, { frames: snapshot.frames });
        let augment: AugmentResponse | null = null;
        if (snapshot.firstAsset && snapshot.lastAsset) {
          const req: Parameters<typeof cl.augment>[0] = {
            first: snapshot.firstAsset,
            last: snapshot.lastAsset,
            length: snapshot.frames,
          };
          if (snapshot.region && snapshot.targets.length > 0) {
            const maskBlob = await new Promise<Blob>((resolve, reject) => {
              regionMaskCanvas(snapshot).toBlob(
                (b) => (b ? resolve(b) : reject(new Error("mask encode failed"))),
                "image/png",
              );
            });
            const maskId = await cl.uploadPng(maskBlob, "mask.png");
            const anchor = regionAnchor(snapshot.region);
            req.manifest = manifest;
            req.region = {
              mask: maskId,
              source_frame: 0,
              anchor: [anchor.x, anchor.y],
              targets: snapshot.targets,
            };
          }
          augment = await cl.augment(req);
        }
        return { render, augment };
      });
      if (result === null) return; // superseded by a newer preview
      preview = result;
      setStatus("preview ready");
      showPreviewFrame();
    } catch (err) {
      if (err instanceof ServiceError) {
        setStatus(`service error ${err.status}: ${err.message}`, true);
      } else {
        setStatus(String(err), true);
      }
    }
  }

  function canvasPoint(ev: MouseEvent): { x: number; y: number } {
    const rect = canvas.getBoundingClientRect();
    return {
      x: (ev.clientX - rect.left) / CANVAS_SCALE,
      y: (ev.clientY - rect.top) / CANVAS_SCALE,
    };
  }

  canvas.addEventListener("mousedown", (ev) => {
    const { x, y } = canvasPoint(ev);
    if (tool === "draw") {
      scene = scene.activeId === null ? startTrajectory(scene, x, y) : appendPoint(scene, x, y);
      redraw();
    } else if (tool === "drag") {
      drag = hitTest(scene, x, y, HIT_RADIUS);
    } else {
      rubber = { x0: x, y0: y };
    }
  });

  canvas.addEventListener("mousemove", (ev) => {
    const { x, y } = canvasPoint(ev);
    if (tool === "drag" && drag) {
      scene = movePoint(scene, drag.id, drag.index, x, y);
      redraw();
    } else if (tool === "region" && rubber) {
      scene = { ...scene, region: { x0: rubber.x0, y0: rubber.y0, x1: x, y1: y } };
      redraw();
    }
  });

  canvas.addEventListener("mouseup", (ev) => {
    const { x, y } = canvasPoint(ev);
    if (tool === "region" && rubber) {
      try {
        scene = setRegion(scene, { x0: rubber.x0, y0: rubber.y0, x1: x, y1: y });
      } catch (err) {
        setStatus(String(err), true);
        scene = { ...scene, region: null };
      }
      rubber = null;
      redraw();
    }
    drag = null;
  });

  byId<HTMLButtonElement>("new-traj").addEventListener("click", () => {
    scene = { ...scene, activeId: null };
    setStatus("click the canvas to start a new trajectory");
  });

  byId<HTMLButtonElement>("delete-traj").addEventListener("click", () => {
    if (scene.activeId !== null) {
      scene = removeTrajectory(scene, scene.activeId);
      redraw();
    }
  });

  byId<HTMLInputElement>("depth-on").addEventListener("change", (ev) => {
    const on = (ev.target as HTMLInputElement).checked;
    if (scene.activeId === null) return;
    const value = Number(byId<HTMLInputElement>("depth").value) || DEFAULT_DEPTH;
    scene = on
      ? enableDepth(scene, scene.activeId, value)
      : { ...scene, polylines: scene.polylines.map((l) => (l.id === scene.activeId ? { ...l, hasDepth: false, points: l.points.map((p) => ({ ...p, depth: null })) } : l)) };
    redraw();
  });

  byId<HTMLInputElement>("depth").addEventListener("input", (ev) => {
    const value = Number((ev.target as HTMLInputElement).value);
    byId<HTMLSpanElement>("depth-label").textContent = value.toFixed(1);
    if (scene.activeId === null) return;
    const line = scene.polylines.find((l) => l.id === scene.activeId);
    if (!line || !line.hasDepth || line.points.length === 0) return;
    scene = setPointDepth(scene, scene.activeId, line.points.length - 1, value);
    redraw();
    if (online) void runPreview(); // depth slider re-renders the depth controls
  });

  for (const t of ["draw", "drag", "region"] as Tool[]) {
    byId<HTMLInputElement>(`tool-${t}`).addEventListener("change", () => {
      tool = t;
    });
  }

  byId<HTMLInputElement>("frames").addEventListener("change", (ev) => {
    const frames = Math.max(2, Math.round(Number((ev.target as HTMLInputElement).value)));
    scene = { ...scene, frames, targets: scene.targets.filter((t) => t < frames - 1) };
    scene = setPreviewFrame(scene, scene.previewFrame);
    byId<HTMLInputElement>("scrub").max = String(frames - 1);
    redraw();
  });

  byId<HTMLInputElement>("targets").addEventListener("change", (ev) => {
    const text = (ev.target as HTMLInputElement).value.trim();
    try {
      const slots = text ? text.split(",").map((s) => Number(s.trim())) : [];
      scene = setTargets(scene, slots);
      setStatus(slots.length ? `target slots: ${scene.targets.join(", ")}` : "no target slots");
    } catch (err) {
      setStatus(String(err), true);
    }
  });

  byId<HTMLInputElement>("scrub").addEventListener("input", (ev) => {
    scene = setPreviewFrame(scene, Number((ev.target as HTMLInputElement).value));
    showPreviewFrame();
  });

  const loadKeyframe = (inputId: string, slot: "first" | "last") => {
    byId<HTMLInputElement>(inputId).addEventListener("change", async (ev) => {
      const input = ev.target as HTMLInputElement;
      const file = input.files && input.files[0];
      if (!file) return;
      try {
        const img = await fileToImage(file);
        if (slot === "first") {
          firstImage = img;
          scene = {
            ...newScene(img.naturalWidth, img.naturalHeight, scene.frames),
            lastAsset: scene.lastAsset,
          };
          resizeCanvas();
        }
        if (online) {
          const id = await client().uploadPng(file);
          scene = slot === "first" ? { ...scene, firstAsset: id } : { ...scene, lastAsset: id };
          setStatus(`${slot} keyframe uploaded as ${id}`);
        } else {
          setStatus(`${slot} keyframe loaded locally (offline: upload deferred)`);
        }
        redraw();
      } catch (err) {
        setStatus(String(err), true);
      }
    });
  };
  loadKeyframe("file-first", "first");
  loadKeyframe("file-last", "last");

  byId<HTMLButtonElement>("preview").addEventListener("click", () => void runPreview());

  byId<HTMLButtonElement>("export").addEventListener("click", () => {
    try {
      downloadText("trajectories.json", exportScene(scene));
      setStatus("manifest exported");
    } catch (err) {
      setStatus(String(err), true);
    }
  });

  byId<HTMLInputElement>("file-import").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files && input.files[0];
    if (!file) return;
    try {
      const text = await file.text();
      const manifest = parseManifest(text);
      scene = sceneFromManifest(manifest);
      resizeCanvas();
      byId<HTMLInputElement>("frames").value = String(scene.frames);
      byId<HTMLInputElement>("scrub").max = String(scene.frames - 1);
      // round-trip sanity: imported manifests re-export canonically equal
      if (exportScene(scene) !== canonicalizeText(text)) {
        setStatus("import round-trip mismatch; please report this manifest", true);
      } else {
        setStatus(`imported ${manifest.trajectories.length} trajectories`);
      }
      redraw();
    } catch (err) {
      if (err instanceof ManifestError) {
        setStatus(`invalid manifest at ${err.path || "/"}: ${err.message}`, true);
      } else {
        setStatus(String(err), true);
      }
    }
  });

  byId<HTMLButtonElement>("reconnect").addEventListener("click", () => void refreshHealth());

  resizeCanvas();
  redraw();
  void refreshHealth();
  setInterval(() => void refreshHealth(), 15000);
}

main();
