/** Overlay geometry: handles, witness triangles, collision markers.
 *
 * Pure data builders keyed by control-point index; the DOM layer just turns
 * these into SVG elements on top of the server-rendered patch image.
 */

import type { EditorState } from "./state.js";

export interface Handle {
  index: number;
  x: number;
  y: number;
  flagged: boolean; // part of a coincident-vertex witness
}

export interface WitnessTriangle {
  indices: [number, number, number];
  points: [number, number][];
  fragile: boolean;
}

export interface CollisionMarker {
  p: [number, number]; // image-space endpoints of the colliding pair
  q: [number, number];
  onBoundary: boolean;
}

export function handles(state: EditorState): Handle[] {
  if (!state.patch) return [];
  const flagged = new Set<number>();
  for (const c of state.report?.vertex_collisions ?? []) {
    flagged.add(c.indices[0]);
    flagged.add(c.indices[1]);
  }
  return state.patch.control_points.map((row, index) => ({
    index,
    x: row[0],
    y: row[1],
    flagged: flagged.has(index),
  }));
}

export function witnessTriangles(state: EditorState): WitnessTriangle[] {
  if (!state.patch || !state.report) return [];
  const ctrl = state.patch.control_points;
  const build = (indices: [number, number, number], fragile: boolean) => ({
    indices,
    points: indices.map((i) => [ctrl[i][0], ctrl[i][1]] as [number, number]) as
      [number, number][],
    fragile,
  });
  return [
    ...state.report.witnesses.map((w) => build(w.indices, false)),
    ...state.report.fragile_triples.map((w) => build(w.indices, true)),
  ];
}

export function collisionMarkers(state: EditorState): CollisionMarker[] {
  if (!state.stress) return [];
  const seen = new Set<string>();
  const out: CollisionMarker[] = [];
  for (const report of state.stress.reports) {
    for (const pair of report.pairs) {
      const key = JSON.stringify([pair.p, pair.q]);
      if (seen.has(key)) continue;
      seen.add(key);
      out.push({ p: pair.p, q: pair.q, onBoundary: pair.on_boundary });
      if (out.length >= 64) return out;
    }
  }
  return out;
}

export function badgeLabel(state: EditorState): string {
  switch (state.badge) {
    case "empty": return "no patch";
    case "checking": return "checking…";
    case "stale": return "stale (server unreachable)";
    case "compatible": return "compatible";
    case "weakly_compatible_only": return "weakly compatible only";
    case "not_weakly_compatible": return "NOT weakly compatible";
  }
}
