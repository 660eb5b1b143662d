/** Thin typed client for the /v1 API; takes an injectable fetch for tests. */

import type { CompatibilityReport, PatchFile, StressSummary } from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function fail(resp: { status: number; json(): Promise<unknown> }): Promise<never> {
  let code = "unknown";
  let message = `HTTP ${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: { code: string; message: string } };
    if (body?.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    /* non-JSON error body */
  }
  throw new ApiRequestError(resp.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) await fail(resp);
    return (await resp.json()) as T;
  }

  async health(): Promise<{ status: string; version: string }> {
    const resp = await this.fetchImpl(this.baseUrl + "/v1/health");
    if (!resp.ok) await fail(resp);
    return (await resp.json()) as { status: string; version: string };
  }

  check(patch: PatchFile): Promise<CompatibilityReport> {
    return this.post("/v1/check", patch);
  }

  async render(patch: PatchFile, grid = 12): Promise<string> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/render?grid=${grid}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(patch),
    });
    if (!resp.ok) await fail(resp);
    return resp.text();
  }

  stress(
    patch: PatchFile,
    opts: { trials?: number; grid?: number; spread?: number; seed?: number } = {},
  ): Promise<StressSummary> {
    return this.post("/v1/stress", { patch, ...opts });
  }

  make(kind: "tensor" | "triangle", m: number, n?: number): Promise<PatchFile> {
    return this.post("/v1/make", { kind, m, ...(n === undefined ? {} : { n }) });
  }
}
