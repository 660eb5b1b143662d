/** Wire types mirroring the /v1 JSON API. */

export interface PatchFile {
  format_version: number;
  lattice_points: [number, number][];
  control_points: number[][];
  weights?: number[];
}

export type Verdict =
  | "compatible"
  | "weakly_compatible_only"
  | "not_weakly_compatible";

export interface OrientedTriple {
  indices: [number, number, number];
  domain_sign: number;
  image_sign: number;
}

export interface VertexCollision {
  indices: [number, number];
  distance: number;
}

export interface CompatibilityReport {
  verdict: Verdict;
  global_sign: number | null;
  witnesses: OrientedTriple[];
  vertex_collisions: VertexCollision[];
  fragile_triples: OrientedTriple[];
  triples_checked: number;
  violations_total: number;
  no_independent_triple: boolean;
  exact: boolean;
}

export interface CollisionPair {
  p: [number, number];
  q: [number, number];
  image_distance: number;
  domain_distance: number;
  on_boundary: boolean;
}

export interface CollisionReport {
  verdict: "no_collision_found" | "collision" | "boundary_collapse";
  pairs: CollisionPair[];
  total_pairs: number;
}

export interface StressSummary {
  certificate: CompatibilityReport;
  trials: number;
  agreements: number;
  disagreements: string[];
  reports: CollisionReport[];
  note: string;
}

export interface ApiError {
  error: { code: string; message: string };
}
