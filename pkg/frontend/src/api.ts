// Typed client for the control-synthesis HTTP service. The fetch
// implementation is injected so tests can fake the transport and the
// browser build can pass window.fetch untouched.

import { TrajectoryManifest } from "./manifest.js";

export interface RenderCfg {
  frames?: number;
  sigma?: number;
  truncate?: number;
  disk_radius?: number;
  mag_max?: number;
  anchors?: boolean;
}

export interface RenderResponse {
  flow: string[];
  depth: string[];
}

export interface SlotAssignment {
  length: number;
  keyframes: number[];
  targets: number[];
}

export interface AugmentResponse {
  frames: string[];
  masks: string[];
  slots: SlotAssignment;
}

export interface AugmentRegion {
  mask: string;
  source_frame: number;
  anchor: [number, number];
  traj_id?: number;
  targets?: number[];
  target_count?: number;
}

export interface MotionReport {
  per_trajectory: { id: number; frechet: number }[];
  mean_frechet: number;
}

export class ServiceError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  /** Absolute URL for a service-relative path like /api/assets/abc. */
  url(path: string): string {
    return path.startsWith("http") ? path : this.base + path;
  }

  private async parseError(resp: Response): Promise<never> {
    let message = `${resp.status} ${resp.statusText}`;
    try {
      const body = (await resp.json()) as { error?: string };
      if (body && typeof body.error === "string") message = body.error;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ServiceError(resp.status, message);
  }

  private async postJson<T>(path: string, payload: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) await this.parseError(resp);
    return (await resp.json()) as T;
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchImpl(this.url("/api/health"));
      if (!resp.ok) return false;
      const body = (await resp.json()) as { ok?: boolean };
      return body.ok === true;
    } catch {
      return false;
    }
  }

  /** Upload a PNG blob; returns the content-addressed asset id. */
  async uploadPng(data: Blob | Uint8Array, name = "upload.png"): Promise<string> {
    const blob =
      data instanceof Blob
        ? data
        : new Blob([data.buffer.slice(data.byteOffset, data.byteOffset + data.byteLength) as ArrayBuffer], { type: "image/png" });
    const form = new FormData();
    form.append("file", blob, name);
    const resp = await this.fetchImpl(this.url("/api/assets"), { method: "POST", body: form });
    if (!resp.ok) await this.parseError(resp);
    const body = (await resp.json()) as { id: string };
    return body.id;
  }

  async fetchAsset(pathOrUrl: string): Promise<Uint8Array> {
    const resp = await this.fetchImpl(this.url(pathOrUrl));
    if (!resp.ok) await this.parseError(resp);
    return new Uint8Array(await resp.arrayBuffer());
  }

  autoTrajectory(req: {
    first: string;
    last: string;
    frames: number;
    threshold?: number;
    max_pairs?: number;
  }): Promise<TrajectoryManifest> {
    return this.postJson("/api/trajectory/auto", req);
  }

  renderControls(manifest: TrajectoryManifest, cfg: RenderCfg = {}): Promise<RenderResponse> {
    return this.postJson("/api/controls/render", { manifest, cfg });
  }

  segment(req: { flow: string; anchor: [number, number]; threshold_frac?: number }): Promise<{ mask: string }> {
    return this.postJson("/api/region/segment", req);
  }

  augment(req: {
    first: string;
    last: string;
    length: number;
    manifest?: TrajectoryManifest;
    region?: AugmentRegion;
  }): Promise<AugmentResponse> {
    return this.postJson("/api/augment", req);
  }

  motion(req: { manifest: TrajectoryManifest; flows: string[] }): Promise<MotionReport> {
    return this.postJson("/api/metrics/motion", req);
  }
}
