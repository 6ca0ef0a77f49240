// Editable authoring scene: trajectory polylines with per-point depth,
// a region rectangle, and timeline slot assignments. All operations are
// pure functions over the scene so undo and tests stay trivial; pixel
// data never lives here, only asset ids handed out by the service.

import {
  ManifestError,
  ManifestPoint,
  TrajectoryManifest,
  exportManifest,
  validateManifest,
} from "./manifest.js";

export interface ScenePoint {
  x: number;
  y: number;
  /** Depth slider value; null while the polyline has depth disabled. */
  depth: number | null;
}

export interface Polyline {
  id: number;
  points: ScenePoint[];
  hasDepth: boolean;
  /** Explicit frame indices from an imported manifest; null = spread evenly. */
  times: number[] | null;
}

export interface RegionRect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface CanvasScene {
  width: number;
  height: number;
  frames: number;
  firstAsset: string | null;
  lastAsset: string | null;
  polylines: Polyline[];
  activeId: number | null;
  region: RegionRect | null;
  /** Intermediate slots that receive translated region content. */
  targets: number[];
  previewFrame: number;
}

export const DEFAULT_DEPTH = 1.0;

export function newScene(width: number, height: number, frames: number): CanvasScene {
  if (width < 1 || height < 1) throw new Error("scene size must be positive");
  if (frames < 2) throw new Error("scene needs at least two frames");
  return {
    width,
    height,
    frames,
    firstAsset: null,
    lastAsset: null,
    polylines: [],
    activeId: null,
    region: null,
    targets: [],
    previewFrame: 0,
  };
}

function clampX(scene: CanvasScene, x: number): number {
  return Math.min(Math.max(x, 0), scene.width - 1);
}

function clampY(scene: CanvasScene, y: number): number {
  return Math.min(Math.max(y, 0), scene.height - 1);
}

function nextId(scene: CanvasScene): number {
  let id = 0;
  for (const line of scene.polylines) id = Math.max(id, line.id + 1);
  return id;
}

function findLine(scene: CanvasScene, id: number): Polyline {
  const line = scene.polylines.find((l) => l.id === id);
  if (!line) throw new Error(`no trajectory with id ${id}`);
  return line;
}

/** Start a new polyline at (x, y) and make it active. */
export function startTrajectory(scene: CanvasScene, x: number, y: number): CanvasScene {
  const line: Polyline = {
    id: nextId(scene),
    points: [{ x: clampX(scene, x), y: clampY(scene, y), depth: null }],
    hasDepth: false,
    times: null,
  };
  return { ...scene, polylines: [...scene.polylines, line], activeId: line.id };
}

/** Append a point to the active polyline. */
export function appendPoint(scene: CanvasScene, x: number, y: number): CanvasScene {
  if (scene.activeId === null) return startTrajectory(scene, x, y);
  const line = findLine(scene, scene.activeId);
  if (line.points.length >= scene.frames) {
    throw new Error(`trajectory ${line.id} already has one point per frame`);
  }
  const point: ScenePoint = {
    x: clampX(scene, x),
    y: clampY(scene, y),
    depth: line.hasDepth ? line.points[line.points.length - 1].depth : null,
  };
  // Growing an imported polyline invalidates its explicit frame indices.
  const updated = { ...line, points: [...line.points, point], times: null };
  return replaceLine(scene, updated);
}

function replaceLine(scene: CanvasScene, line: Polyline): CanvasScene {
  return {
    ...scene,
    polylines: scene.polylines.map((l) => (l.id === line.id ? line : l)),
  };
}

export function movePoint(
  scene: CanvasScene,
  id: number,
  index: number,
  x: number,
  y: number,
): CanvasScene {
  const line = findLine(scene, id);
  if (index < 0 || index >= line.points.length) {
    throw new Error(`trajectory ${id} has no point ${index}`);
  }
  const points = line.points.map((p, i) =>
    i === index ? { ...p, x: clampX(scene, x), y: clampY(scene, y) } : p,
  );
  return replaceLine(scene, { ...line, points });
}

export function removeTrajectory(scene: CanvasScene, id: number): CanvasScene {
  const polylines = scene.polylines.filter((l) => l.id !== id);
  return {
    ...scene,
    polylines,
    activeId: scene.activeId === id ? null : scene.activeId,
  };
}

/** Enable depth on a polyline, seeding every point with the given value. */
export function enableDepth(scene: CanvasScene, id: number, value: number): CanvasScene {
  if (!(value > 0) || !Number.isFinite(value)) {
    throw new Error("depth must be positive and finite");
  }
  const line = findLine(scene, id);
  const points = line.points.map((p) => ({ ...p, depth: value }));
  return replaceLine(scene, { ...line, points, hasDepth: true });
}

export function disableDepth(scene: CanvasScene, id: number): CanvasScene {
  const line = findLine(scene, id);
  const points = line.points.map((p) => ({ ...p, depth: null }));
  return replaceLine(scene, { ...line, points, hasDepth: false });
}

/** Set one point's depth slider value; depth must already be enabled. */
export function setPointDepth(
  scene: CanvasScene,
  id: number,
  index: number,
  value: number,
): CanvasScene {
  if (!(value > 0) || !Number.isFinite(value)) {
    throw new Error("depth must be positive and finite");
  }
  const line = findLine(scene, id);
  if (!line.hasDepth) throw new Error(`trajectory ${id} has depth disabled`);
  if (index < 0 || index >= line.points.length) {
    throw new Error(`trajectory ${id} has no point ${index}`);
  }
  const points = line.points.map((p, i) => (i === index ? { ...p, depth: value } : p));
  return replaceLine(scene, { ...line, points });
}

export function setRegion(scene: CanvasScene, rect: RegionRect | null): CanvasScene {
  if (rect === null) return { ...scene, region: null, targets: [] };
  const x0 = clampX(scene, Math.min(rect.x0, rect.x1));
  const x1 = clampX(scene, Math.max(rect.x0, rect.x1));
  const y0 = clampY(scene, Math.min(rect.y0, rect.y1));
  const y1 = clampY(scene, Math.max(rect.y0, rect.y1));
  if (x1 - x0 < 1 || y1 - y0 < 1) throw new Error("region rectangle is degenerate");
  return { ...scene, region: { x0, y0, x1, y1 } };
}

export function regionAnchor(region: RegionRect): { x: number; y: number } {
  return { x: (region.x0 + region.x1) / 2, y: (region.y0 + region.y1) / 2 };
}

/**
 * Assign target slots. Mirrors the composed-clip rules: slots are unique,
 * strictly inside (0, frames-1), and leave the endpoint keyframes alone.
 */
export function setTargets(scene: CanvasScene, targets: number[]): CanvasScene {
  const sorted = [...targets].sort((a, b) => a - b);
  for (let i = 0; i < sorted.length; i++) {
    const t = sorted[i];
    if (!Number.isInteger(t)) throw new Error(`target slot ${t} is not an integer`);
    if (t <= 0 || t >= scene.frames - 1) {
      throw new Error(`target slot ${t} collides with a keyframe or lies outside the clip`);
    }
    if (i > 0 && sorted[i - 1] === t) throw new Error(`duplicate target slot ${t}`);
  }
  return { ...scene, targets: sorted };
}

export function setPreviewFrame(scene: CanvasScene, frame: number): CanvasScene {
  const clamped = Math.min(Math.max(Math.round(frame), 0), scene.frames - 1);
  return { ...scene, previewFrame: clamped };
}

/** Evenly spread frame indices for a k-point polyline; strictly increasing. */
export function assignTimes(frames: number, count: number): number[] {
  if (count === 1) return [0];
  const ts: number[] = [];
  for (let i = 0; i < count; i++) {
    ts.push(Math.round((i * (frames - 1)) / (count - 1)));
  }
  return ts;
}

/** Problems that block export; empty when the scene is exportable. */
export function sceneProblems(scene: CanvasScene): string[] {
  const problems: string[] = [];
  if (scene.polylines.length === 0) problems.push("draw at least one trajectory");
  for (const line of scene.polylines) {
    if (line.points.length < 2) {
      problems.push(`trajectory ${line.id} needs at least 2 points before export`);
    }
    if (line.times === null && line.points.length > scene.frames) {
      problems.push(`trajectory ${line.id} has more points than frames`);
    }
  }
  return problems;
}

export function toManifest(scene: CanvasScene): TrajectoryManifest {
  const problems = sceneProblems(scene);
  if (problems.length > 0) throw new Error(problems[0]);
  const trajectories = scene.polylines.map((line) => {
    const ts = line.times ?? assignTimes(scene.frames, line.points.length);
    const points: ManifestPoint[] = line.points.map((p, i) => {
      const point: ManifestPoint = { t: ts[i], x: p.x, y: p.y };
      if (line.hasDepth && p.depth !== null) point.depth = p.depth;
      return point;
    });
    return { id: line.id, points };
  });
  trajectories.sort((a, b) => a.id - b.id);
  return {
    width: scene.width,
    height: scene.height,
    frames: scene.frames,
    trajectories,
  };
}

export function exportScene(scene: CanvasScene): string {
  return exportManifest(toManifest(scene));
}

/** Rebuild scene polylines from a manifest; spatial edits start fresh. */
export function sceneFromManifest(manifest: TrajectoryManifest): CanvasScene {
  const checked = validateManifest(manifest);
  const scene = newScene(checked.width, checked.height, checked.frames);
  const polylines: Polyline[] = checked.trajectories.map((tr) => {
    if (tr.points.length < 2) {
      throw new ManifestError(`/trajectories`, `trajectory ${tr.id} has fewer than 2 points`);
    }
    const hasDepth = tr.points[0].depth !== undefined;
    return {
      id: tr.id,
      points: tr.points.map((p) => ({ x: p.x, y: p.y, depth: hasDepth ? p.depth! : null })),
      hasDepth,
      times: tr.points.map((p) => p.t),
    };
  });
  return { ...scene, polylines, activeId: polylines.length ? polylines[0].id : null };
}

/** Nearest control point within radius, for drag interactions. */
export function hitTest(
  scene: CanvasScene,
  x: number,
  y: number,
  radius: number,
): { id: number; index: number } | null {
  let best: { id: number; index: number } | null = null;
  let bestD2 = radius * radius;
  for (const line of scene.polylines) {
    line.points.forEach((p, i) => {
      const d2 = (p.x - x) ** 2 + (p.y - y) ** 2;
      if (d2 <= bestD2) {
        bestD2 = d2;
        best = { id: line.id, index: i };
      }
    });
  }
  return best;
}
