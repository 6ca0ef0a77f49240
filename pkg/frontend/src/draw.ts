// Canvas rendering of a scene over the keyframe backdrop. Pure drawing:
// reads the scene, paints the context, owns no state.

import { CanvasScene, Polyline } from "./scene.js";

const LINE_COLORS = ["#e8453c", "#2e7bd6", "#2ca05a", "#b648c9", "#d98b25", "#16a0a8"];
const POINT_RADIUS = 4;
const ACTIVE_POINT_RADIUS = 6;

export function lineColor(id: number): string {
  return LINE_COLORS[id % LINE_COLORS.length];
}

function drawPolyline(
  ctx: CanvasRenderingContext2D,
  line: Polyline,
  scale: number,
  active: boolean,
): void {
  const color = lineColor(line.id);
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = active ? 2.5 : 1.5;
  if (line.points.length > 1) {
    ctx.beginPath();
    ctx.moveTo(line.points[0].x * scale, line.points[0].y * scale);
    for (const p of line.points.slice(1)) {
      ctx.lineTo(p.x * scale, p.y * scale);
    }
    ctx.stroke();
  }
  line.points.forEach((p, i) => {
    const r = active && i === line.points.length - 1 ? ACTIVE_POINT_RADIUS : POINT_RADIUS;
    ctx.beginPath();
    ctx.arc(p.x * scale, p.y * scale, r, 0, Math.PI * 2);
    ctx.fill();
    if (line.hasDepth && p.depth !== null) {
      ctx.font = "10px sans-serif";
      ctx.fillText(p.depth.toFixed(1), p.x * scale + r + 2, p.y * scale - r);
    }
  });
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  scene: CanvasScene,
  backdrop: CanvasImageSource | null,
  scale: number,
): void {
  ctx.clearRect(0, 0, scene.width * scale, scene.height * scale);
  if (backdrop) {
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(backdrop, 0, 0, scene.width * scale, scene.height * scale);
  } else {
    ctx.fillStyle = "#1b1b1f";
    ctx.fillRect(0, 0, scene.width * scale, scene.height * scale);
  }
  if (scene.region) {
    const { x0, y0, x1, y1 } = scene.region;
    ctx.strokeStyle = "#f2c744";
    ctx.setLineDash([6, 4]);
    ctx.lineWidth = 1.5;
    ctx.strokeRect(x0 * scale, y0 * scale, (x1 - x0) * scale, (y1 - y0) * scale);
    ctx.setLineDash([]);
  }
  for (const line of scene.polylines) {
    drawPolyline(ctx, line, scale, line.id === scene.activeId);
  }
}

/** White-on-black region mask at full scene resolution, for upload. */
export function regionMaskCanvas(scene: CanvasScene): HTMLCanvasElement {
  if (!scene.region) throw new Error("scene has no region rectangle");
  const canvas = document.createElement("canvas");
  canvas.width = scene.width;
  canvas.height = scene.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");
  ctx.fillStyle = "#000000";
  ctx.fillRect(0, 0, scene.width, scene.height);
  ctx.fillStyle = "#ffffff";
  const { x0, y0, x1, y1 } = scene.region;
  ctx.fillRect(Math.round(x0), Math.round(y0), Math.round(x1 - x0) + 1, Math.round(y1 - y0) + 1);
  return canvas;
}
