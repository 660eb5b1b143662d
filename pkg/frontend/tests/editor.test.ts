import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { EditorCore, coordsKey } from "../src/state.js";
import { collisionMarkers, handles, witnessTriangles } from "../src/overlay.js";
import { MockBackend, bruteForceCheck } from "./mockBackend.js";
import type { PatchFile } from "../src/types.js";

const DEGENERATE: PatchFile = {
  format_version: 1,
  lattice_points: [[0, 0], [0, 1], [1, 0], [1, 1]],
  control_points: [[0, 0], [0, 1], [1, 0], [1, 0]],
  weights: [1, 1, 1, 1],
};

function makeCore(backend: MockBackend): EditorCore {
  return new EditorCore(new ApiClient("http://mock", backend.fetch), 75);
}

async function settle(): Promise<void> {
  // let queued microtasks (fetch promises) run
  for (let i = 0; i < 8; i++) await Promise.resolve();
}

describe("editor drag loop", () => {
  let backend: MockBackend;
  let core: EditorCore;
  let frames: Array<{ badge: string; coords: string }>;

  beforeEach(async () => {
    vi.useFakeTimers();
    backend = new MockBackend();
    core = makeCore(backend);
    frames = [];
    core.onChange((s) => {
      if (s.patch) frames.push({ badge: s.badge, coords: coordsKey(s.patch) });
    });
    await core.loadTemplate("tensor", 1, 1);
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  async function dragCorner(path: [number, number][]): Promise<void> {
    core.beginDrag(3);
    for (const [x, y] of path) {
      core.dragPoint(3, x, y);
      vi.advanceTimersByTime(40); // faster than the 75 ms debounce
    }
    core.endDrag(); // flushes the debounce
    await settle();
  }

  it("flips the badge across the opposite diagonal and back, no stale frame", async () => {
    expect(core.state.badge).toBe("compatible");

    await dragCorner([[0.9, 0.9], [0.6, 0.6], [0.3, 0.3]]);
    expect(core.state.badge).toBe("not_weakly_compatible");
    expect(core.state.report!.witnesses.length).toBeGreaterThan(0);
    expect(witnessTriangles(core.state).length).toBeGreaterThan(0);

    await dragCorner([[0.6, 0.6], [1, 1]]);
    expect(core.state.badge).toBe("compatible");

    // audit log: applied responses only, in increasing id order, and each
    // applied verdict was computed for exactly the displayed coordinates
    const applied = core.audit.filter((e) => e.applied);
    expect(applied.length).toBeGreaterThan(0);
    expect(core.audit.every((e) => !e.applied || e.coordsMatchedDisplay)).toBe(true);
    for (let i = 1; i < applied.length; i++) {
      expect(applied[i].id).toBeGreaterThan(applied[i - 1].id);
    }
    // every verdict frame shown matches a fresh check of the shown coords
    for (const frame of frames) {
      if (frame.badge === "checking" || frame.badge === "stale") continue;
      const patch = { ...core.state.patch!, control_points: JSON.parse(frame.coords) };
      expect(frame.badge).toBe(bruteForceCheck(patch).verdict);
    }
  });

  it("drops out-of-order responses instead of showing stale verdicts", async () => {
    backend.manualChecks = true;
    core.dragPoint(3, 0.3, 0.3); // inside the hull: not weakly compatible
    vi.advanceTimersByTime(80);
    await settle();
    core.dragPoint(3, 1.0, 1.0); // back to the identity: compatible
    vi.advanceTimersByTime(80);
    await settle();
    expect(backend.pending.length).toBe(2);

    backend.release(1); // newest first
    await settle();
    expect(core.state.badge).toBe("compatible");

    backend.release(0); // the stale one arrives late
    await settle();
    expect(core.state.badge).toBe("compatible"); // unchanged
    const stale = core.audit.filter((e) => !e.applied);
    expect(stale.some((e) => e.reason === "superseded" || e.reason === "coords_changed"))
      .toBe(true);
  });

  it("shows one draggable handle per control point of a template", async () => {
    await core.loadTemplate("tensor", 3, 3);
    expect(handles(core.state)).toHaveLength(16);
  });

  it("merging two vertex images flips the badge to weakly compatible only", async () => {
    await dragCorner([[1, 0]]); // drop f(1,1) exactly onto f(1,0)
    expect(core.state.badge).toBe("weakly_compatible_only");
    expect(core.state.report!.vertex_collisions).toHaveLength(1);
  });

  it("undo restores the patch byte-for-byte", async () => {
    const before = core.serializedPatch();
    await dragCorner([[0.4, 0.2]]);
    expect(core.serializedPatch()).not.toBe(before);
    core.undo();
    await settle();
    expect(core.serializedPatch()).toBe(before);
    expect(core.state.badge).toBe("compatible");
  });

  it("network failure marks the badge stale but keeps edits", async () => {
    const flaky = new MockBackend();
    const broken = new EditorCore(
      new ApiClient("http://mock", async (url, init) => {
        if (url.includes("/v1/check") && flaky.requests.includes("/v1/render"))
          throw new Error("connection refused");
        return flaky.fetch(url, init);
      }), 75);
    await broken.loadTemplate("tensor", 1, 1);
    broken.dragPoint(3, 0.5, 0.4);
    vi.advanceTimersByTime(80);
    await settle();
    expect(broken.state.badge).toBe("stale");
    expect(broken.state.patch!.control_points[3]).toEqual([0.5, 0.4]);
  });
});

describe("degenerate patch display", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("shows the coincident-vertex witness on load", async () => {
    const backend = new MockBackend();
    const core = makeCore(backend);
    await core.loadPatch(DEGENERATE);
    expect(core.state.badge).toBe("weakly_compatible_only");
    expect(core.state.report!.vertex_collisions[0].indices).toEqual([2, 3]);
    const flagged = handles(core.state).filter((h) => h.flagged);
    expect(flagged.map((h) => h.index).sort()).toEqual([2, 3]);
  });

  it("rejects malformed patches and keeps prior state", async () => {
    const backend = new MockBackend();
    const core = makeCore(backend);
    await core.loadTemplate("tensor", 1, 1);
    const before = core.serializedPatch();
    await expect(core.loadPatch({ format_version: 9 } as unknown as PatchFile))
      .rejects.toThrow();
    expect(core.serializedPatch()).toBe(before);
    expect(core.state.banner).toMatch(/load rejected/);
  });

  it("stress overlays the collapsed-edge markers", async () => {
    const backend = new MockBackend();
    const core = makeCore(backend);
    await core.loadPatch(DEGENERATE);
    const summary = await core.runStress(5, 48);
    expect(summary.reports[0].verdict).toBe("boundary_collapse");
    const markers = collisionMarkers(core.state);
    expect(markers.length).toBe(1);
    expect(markers[0].onBoundary).toBe(true);
    expect(markers[0].p[0]).toBe(1);
  });
});
