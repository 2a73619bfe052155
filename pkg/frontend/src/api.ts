// Thin typed client over the explorer service. The fetch implementation is
// injectable so tests can run without a server.

import type {
  AnalogyResult,
  Edit,
  FingerprintPayload,
  FingerprintResponse,
  HealthResponse,
  PathResult,
  PredictResponse,
  SomMeta,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parse<T>(response: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON body: fall through to the status check
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : `HTTP ${response.status}`;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class Api {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  private get<T>(path: string, signal?: AbortSignal): Promise<T> {
    return this.fetchImpl(this.url(path), { signal }).then((r) => parse<T>(r));
  }

  private post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    return this.fetchImpl(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    }).then((r) => parse<T>(r));
  }

  health(): Promise<HealthResponse> {
    return this.get("/health");
  }

  entities(prefix: string, limit = 50): Promise<{ entities: string[]; total: number }> {
    const q = new URLSearchParams({ prefix, limit: String(limit) });
    return this.get(`/entities?${q}`);
  }

  relations(): Promise<{ relations: string[] }> {
    return this.get("/relations");
  }

  fingerprintOf(entity: string, signal?: AbortSignal): Promise<FingerprintResponse> {
    return this.get(`/fingerprint/${encodeURIComponent(entity)}`, signal);
  }

  fingerprintSet(
    entities: string[],
    signal?: AbortSignal,
  ): Promise<{ fingerprint: FingerprintPayload; members: number }> {
    return this.post("/fingerprint/set", { entities }, signal);
  }

  queryPath(
    source: string,
    relations: string[],
    k: number,
    signal?: AbortSignal,
  ): Promise<{ results: PathResult[] }> {
    return this.post("/query/path", { source, relations, k }, signal);
  }

  queryAnalogy(
    plus: string[],
    minus: string[],
    k: number,
    signal?: AbortSignal,
  ): Promise<{ results: AnalogyResult[] }> {
    return this.post("/query/analogy", { plus, minus, k }, signal);
  }

  whatIf(
    cells: number[][],
    edits: Edit[],
    k: number,
    signal?: AbortSignal,
  ): Promise<WhatIfResponse> {
    return this.post("/whatif", { fingerprint: cells, edits, k }, signal);
  }

  somMeta(): Promise<SomMeta> {
    return this.get("/som/meta");
  }

  predict(compound: string, gene: string, signal?: AbortSignal): Promise<PredictResponse> {
    return this.post("/predict", { compound, gene }, signal);
  }
}
