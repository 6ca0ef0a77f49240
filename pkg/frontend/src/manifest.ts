// Trajectory manifest schema: parsing, validation, canonical serialization.
// The canonical form matches the service's JSON style byte for byte:
// sorted keys, two-space indent, trailing newline, and a ".0" suffix on
// integral values of the float-valued fields.

export interface ManifestPoint {
  t: number;
  x: number;
  y: number;
  depth?: number;
}

export interface ManifestTrajectory {
  id: number;
  points: ManifestPoint[];
}

export interface TrajectoryManifest {
  width: number;
  height: number;
  frames: number;
  trajectories: ManifestTrajectory[];
}

/** Fields serialized as floats; everything else numeric is an integer. */
const FLOAT_KEYS = new Set(["x", "y", "depth"]);

export class ManifestError extends Error {
  /** JSON pointer to the offending value, e.g. "/trajectories/0/points". */
  readonly path: string;

  constructor(path: string, message: string) {
    super(`${path}: ${message}`);
    this.name = "ManifestError";
    this.path = path;
  }
}

type JsonValue = null | boolean | number | string | JsonValue[] | { [k: string]: JsonValue };

function isRecord(v: unknown): v is { [k: string]: JsonValue } {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function requireInt(v: unknown, path: string): number {
  if (typeof v !== "number" || !Number.isInteger(v)) {
    throw new ManifestError(path, "expected an integer");
  }
  return v;
}

function requireFloat(v: unknown, path: string): number {
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new ManifestError(path, "expected a finite number");
  }
  return v;
}

function parsePoint(v: unknown, path: string): ManifestPoint {
  if (!isRecord(v)) throw new ManifestError(path, "expected a point object");
  const point: ManifestPoint = {
    t: requireInt(v.t ?? null, `${path}/t`),
    x: requireFloat(v.x ?? null, `${path}/x`),
    y: requireFloat(v.y ?? null, `${path}/y`),
  };
  if ("depth" in v && v.depth !== null) {
    point.depth = requireFloat(v.depth, `${path}/depth`);
  }
  return point;
}

function parseTrajectory(v: unknown, path: string): ManifestTrajectory {
  if (!isRecord(v)) throw new ManifestError(path, "expected a trajectory object");
  const id = requireInt(v.id ?? null, `${path}/id`);
  if (!Array.isArray(v.points)) {
    throw new ManifestError(`${path}/points`, "expected an array of points");
  }
  const points = v.points.map((p, i) => parsePoint(p, `${path}/points/${i}`));
  points.sort((a, b) => a.t - b.t);
  for (let i = 1; i < points.length; i++) {
    if (points[i].t === points[i - 1].t) {
      throw new ManifestError(`${path}/points`, `duplicate frame index ${points[i].t}`);
    }
  }
  const withDepth = points.filter((p) => p.depth !== undefined).length;
  if (withDepth !== 0 && withDepth !== points.length) {
    throw new ManifestError(`${path}/points`, "mixes points with and without depth");
  }
  return { id, points };
}

/** Parse and validate a manifest document; errors carry JSON-pointer paths. */
export function validateManifest(doc: unknown): TrajectoryManifest {
  if (!isRecord(doc)) throw new ManifestError("", "expected a manifest object");
  const width = requireInt(doc.width ?? null, "/width");
  const height = requireInt(doc.height ?? null, "/height");
  const frames = requireInt(doc.frames ?? null, "/frames");
  if (width < 1 || height < 1) throw new ManifestError("/width", "frame size must be positive");
  if (frames < 1) throw new ManifestError("/frames", "frame count must be positive");
  if (!Array.isArray(doc.trajectories)) {
    throw new ManifestError("/trajectories", "expected an array");
  }
  const trajectories = doc.trajectories.map((t, i) => parseTrajectory(t, `/trajectories/${i}`));
  const seen = new Set<number>();
  trajectories.forEach((tr, i) => {
    if (seen.has(tr.id)) {
      throw new ManifestError(`/trajectories/${i}/id`, `duplicate trajectory id ${tr.id}`);
    }
    seen.add(tr.id);
    tr.points.forEach((p, j) => {
      if (p.t < 0 || p.t >= frames) {
        throw new ManifestError(`/trajectories/${i}/points/${j}/t`, `frame index ${p.t} outside [0, ${frames})`);
      }
    });
  });
  trajectories.sort((a, b) => a.id - b.id);
  return { width, height, frames, trajectories };
}

export function parseManifest(text: string): TrajectoryManifest {
  let doc: JsonValue;
  try {
    doc = JSON.parse(text) as JsonValue;
  } catch (err) {
    throw new ManifestError("", `invalid JSON: ${(err as Error).message}`);
  }
  return validateManifest(doc);
}

function formatNumber(v: number, key: string | null): string {
  if (!Number.isFinite(v)) throw new ManifestError("", `non-finite number ${v}`);
  if (key !== null && FLOAT_KEYS.has(key) && Number.isInteger(v)) {
    return `${v}.0`;
  }
  return String(v);
}

function writeValue(v: JsonValue, key: string | null, indent: string, out: string[]): void {
  if (v === null) {
    out.push("null");
  } else if (typeof v === "boolean") {
    out.push(v ? "true" : "false");
  } else if (typeof v === "number") {
    out.push(formatNumber(v, key));
  } else if (typeof v === "string") {
    out.push(JSON.stringify(v));
  } else if (Array.isArray(v)) {
    if (v.length === 0) {
      out.push("[]");
      return;
    }
    const inner = indent + "  ";
    out.push("[\n");
    v.forEach((item, i) => {
      out.push(inner);
      writeValue(item, key, inner, out);
      out.push(i < v.length - 1 ? ",\n" : "\n");
    });
    out.push(indent + "]");
  } else {
    const keys = Object.keys(v).sort();
    if (keys.length === 0) {
      out.push("{}");
      return;
    }
    const inner = indent + "  ";
    out.push("{\n");
    keys.forEach((k, i) => {
      out.push(`${inner}${JSON.stringify(k)}: `);
      writeValue(v[k], k, inner, out);
      out.push(i < keys.length - 1 ? ",\n" : "\n");
    });
    out.push(indent + "}");
  }
}

/**
 * Serialize with sorted keys, two-space indent, and a trailing newline.
 * Integral x/y/depth values keep a ".0" so output matches the service.
 */
export function canonicalJson(doc: JsonValue): string {
  const out: string[] = [];
  writeValue(doc, null, "", out);
  out.push("\n");
  return out.join("");
}

export function exportManifest(manifest: TrajectoryManifest): string {
  const doc: JsonValue = {
    width: manifest.width,
    height: manifest.height,
    frames: manifest.frames,
    trajectories: manifest.trajectories.map((tr) => ({
      id: tr.id,
      points: tr.points.map((p) => {
        const point: { [k: string]: JsonValue } = { t: p.t, x: p.x, y: p.y };
        if (p.depth !== undefined) point.depth = p.depth;
        return point;
      }),
    })),
  };
  return canonicalJson(doc);
}

/** Canonical text of an arbitrary manifest-shaped JSON document. */
export function canonicalizeText(text: string): string {
  return exportManifest(parseManifest(text));
}
