import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api.js";
import { MockBackend } from "./mockBackend.js";
import type { PatchFile } from "../src/types.js";

const SQUARE: PatchFile = {
  format_version: 1,
  lattice_points: [[0, 0], [0, 1], [1, 0], [1, 1]],
  control_points: [[0, 0], [0, 1], [1, 0], [1, 1]],
};

describe("api client", () => {
  it("round-trips a check", async () => {
    const api = new ApiClient("http://mock", new MockBackend().fetch);
    const report = await api.check(SQUARE);
    expect(report.verdict).toBe("compatible");
    expect(report.triples_checked).toBe(4);
  });

  it("maps structured errors", async () => {
    const api = new ApiClient("http://mock", new MockBackend().fetch);
    await expect(api.check({ format_version: 2 } as PatchFile))
      .rejects.toMatchObject({ status: 400, code: "invalid_body" });
    await expect(api.check({ ...SQUARE, weights: [1, 1, -1, 1] }))
      .rejects.toBeInstanceOf(ApiRequestError);
  });

  it("fetches templates and svg", async () => {
    const api = new ApiClient("http://mock", new MockBackend().fetch);
    const patch = await api.make("tensor", 2, 2);
    expect(patch.lattice_points).toHaveLength(9);
    const svg = await api.render(patch, 8);
    expect(svg).toContain("<svg");
    const health = await api.health();
    expect(health.status).toBe("ok");
  });
});
