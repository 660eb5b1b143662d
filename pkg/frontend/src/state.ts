/** Editor core: patch state, verdict round trips, undo, request-id audit.
 *
 * All geometry math lives on the server; this module only moves control
 * points locally and keeps the displayed verdict honest.  Every check/render
 * round trip carries a monotonically increasing request id plus a snapshot of
 * the control points it was issued for; a response is applied only when it is
 * the newest request AND the control points have not moved since.  The audit
 * log records every arrival so tests can prove no stale frame was shown.
 */

import { ApiClient } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import type {
  CompatibilityReport,
  PatchFile,
  StressSummary,
} from "./types.js";

export type Badge =
  | "empty"
  | "checking"
  | "stale"
  | "compatible"
  | "weakly_compatible_only"
  | "not_weakly_compatible";

export interface DragState {
  index: number;
  origin: [number, number];
}

export interface AuditEntry {
  id: number;
  applied: boolean;
  reason: "applied" | "superseded" | "coords_changed" | "failed";
  coordsMatchedDisplay: boolean;
  verdict: string | null;
}

export interface EditorState {
  patch: PatchFile | null;
  badge: Badge;
  report: CompatibilityReport | null;
  svg: string;
  drag: DragState | null;
  spread: number;
  stress: StressSummary | null;
  banner: string | null;
}

export function coordsKey(patch: PatchFile): string {
  return JSON.stringify(patch.control_points);
}

export class EditorCore {
  readonly state: EditorState = {
    patch: null,
    badge: "empty",
    report: null,
    svg: "",
    drag: null,
    spread: 100,
    stress: null,
    banner: null,
  };
  readonly audit: AuditEntry[] = [];

  private nextId = 1;
  private newestIssued = 0;
  private history: string[] = [];
  private listeners: Array<(s: EditorState) => void> = [];
  private refreshSoon: Debounced<[]>;

  constructor(
    private readonly api: ApiClient,
    debounceMs = 75,
  ) {
    this.refreshSoon = debounce(() => void this.refresh(), debounceMs);
  }

  onChange(listener: (s: EditorState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l(this.state);
  }

  /** Load a patch object; on server rejection the previous state is kept. */
  async loadPatch(patch: PatchFile): Promise<void> {
    try {
      const [report, svg] = await Promise.all([
        this.api.check(patch),
        this.api.render(patch),
      ]);
      this.state.patch = patch;
      this.state.report = report;
      this.state.badge = report.verdict;
      this.state.svg = svg;
      this.state.stress = null;
      this.state.banner = null;
      this.history = [JSON.stringify(patch)];
      this.newestIssued = 0;
      this.emit();
    } catch (err) {
      this.state.banner = `load rejected: ${(err as Error).message}`;
      this.emit();
      throw err;
    }
  }

  async loadTemplate(kind: "tensor" | "triangle", m: number, n?: number): Promise<void> {
    await this.loadPatch(await this.api.make(kind, m, n));
  }

  beginDrag(index: number): void {
    const patch = this.requirePatch();
    const [x, y] = patch.control_points[index];
    this.state.drag = { index, origin: [x, y] };
    this.emit();
  }

  /** Move a control point; verdict refresh is debounced behind the drag. */
  dragPoint(index: number, x: number, y: number): void {
    const patch = this.requirePatch();
    const control = patch.control_points.map((row) => row.slice());
    control[index] = [x, y];
    this.state.patch = { ...patch, control_points: control };
    this.state.badge = "checking";
    this.emit();
    this.refreshSoon();
  }

  endDrag(): void {
    this.state.drag = null;
    const patch = this.requirePatch();
    this.history.push(JSON.stringify(patch));
    this.refreshSoon.flush();
    this.emit();
  }

  /** Undo restores the previous patch byte-for-byte. */
  undo(): void {
    if (this.history.length < 2) return;
    this.history.pop();
    this.state.patch = JSON.parse(this.history[this.history.length - 1]) as PatchFile;
    this.state.badge = "checking";
    this.emit();
    this.refreshSoon.cancel();
    void this.refresh();
  }

  serializedPatch(): string {
    return JSON.stringify(this.requirePatch());
  }

  /** Issue a check/render round trip guarded by the request-id protocol. */
  async refresh(): Promise<void> {
    const patch = this.requirePatch();
    const id = this.nextId++;
    this.newestIssued = id;
    const issuedFor = coordsKey(patch);
    let report: CompatibilityReport;
    let svg: string;
    try {
      [report, svg] = await Promise.all([
        this.api.check(patch),
        this.api.render(patch),
      ]);
    } catch {
      if (id === this.newestIssued) {
        this.state.badge = "stale";
        this.audit.push({
          id, applied: false, reason: "failed",
          coordsMatchedDisplay: false, verdict: null,
        });
        this.emit();
      }
      return;
    }
    const current = this.state.patch ? coordsKey(this.state.patch) : "";
    const matches = issuedFor === current;
    if (id !== this.newestIssued) {
      this.audit.push({
        id, applied: false, reason: "superseded",
        coordsMatchedDisplay: matches, verdict: report.verdict,
      });
      return;
    }
    if (!matches) {
      this.audit.push({
        id, applied: false, reason: "coords_changed",
        coordsMatchedDisplay: false, verdict: report.verdict,
      });
      return;
    }
    this.state.report = report;
    this.state.badge = report.verdict;
    this.state.svg = svg;
    this.audit.push({
      id, applied: true, reason: "applied",
      coordsMatchedDisplay: true, verdict: report.verdict,
    });
    this.emit();
  }

  /** Run the oracle; collision witnesses land in state.stress for overlay. */
  async runStress(trials = 20, grid = 64): Promise<StressSummary> {
    const patch = this.requirePatch();
    const summary = await this.api.stress(patch, {
      trials, grid, spread: this.state.spread,
    });
    this.state.stress = summary;
    this.emit();
    return summary;
  }

  setSpread(spread: number): void {
    this.state.spread = spread;
    this.emit();
  }

  private requirePatch(): PatchFile {
    if (!this.state.patch) throw new Error("no patch loaded");
    return this.state.patch;
  }
}
