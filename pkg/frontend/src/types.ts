// Wire types of the explorer service. The client never reshapes or reorders
// server payloads; these interfaces mirror the JSON bodies exactly.

export interface FingerprintPayload {
  width: number;
  height: number;
  subject: string;
  cells: number[][]; // bands 0 | 1 | 2, row-major rows
}

export interface FingerprintResponse {
  fingerprint: FingerprintPayload;
  thresholds?: { band2_max: number; band1_max: number };
}

export interface PathResult {
  entity: string;
  score: number;
}

export interface AnalogyResult {
  entity: string;
  distance: number;
}

export interface WhatIfResult {
  entity: string;
  similarity: number;
}

export interface WhatIfResponse {
  fingerprint: FingerprintPayload;
  results: WhatIfResult[];
}

export interface SomMeta {
  width: number;
  height: number;
  toroidal: boolean;
  clusters: number[][];
  node_quality: (number | null)[][];
}

export interface PredictResponse {
  compound: string;
  gene: string;
  probabilities: number[];
  interacting: number | null;
}

export interface HealthResponse {
  status: string;
  entities: number;
  relations: number;
  grid: [number, number];
  predict_available: boolean;
}

export interface Edit {
  row: number;
  col: number;
  band: number;
}
