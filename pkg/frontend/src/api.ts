// Thin typed layer over the retrieval service. The UI never ranks or embeds
// anything itself; every number shown on screen comes from these endpoints.

export interface HealthResponse {
  status: "ready" | "loading";
  model_fingerprint: string | null;
  index_size: number;
}

export interface LabelEntry {
  label: number;
  characteristic: string;
  direction: "smaller" | "larger";
  template: string;
}

export interface SearchResult {
  pair_id: string;
  score: number;
  label: number;
  characteristic: string;
  target_level: "smaller" | "larger";
  ref_preview: number[];
  tgt_preview: number[];
}

export interface SearchResponse {
  results: SearchResult[];
  model_fingerprint: string;
  latency_s: number;
}

export interface PairDetail {
  pair_id: string;
  base_id: string;
  label: number;
  characteristic: string;
  target_level: "smaller" | "larger";
  length: number;
  ref: number[];
  tgt: number[];
}

const API_BASE = (import.meta.env?.VITE_API_BASE ?? "").replace(/\/+$/, "");

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(`${API_BASE}${path}`, init);
  } catch {
    // fetch rejects without a status when the service is down entirely
    throw new ApiError(0, "service unreachable; is `tsdiff serve` running?");
  }
  if (!response.ok) {
    let detail = `request failed with status ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (typeof body.detail === "string") {
        detail = body.detail;
      }
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export const fetchHealth = (): Promise<HealthResponse> => request<HealthResponse>("/health");

export const fetchLabels = (): Promise<LabelEntry[]> => request<LabelEntry[]>("/labels");

export const fetchPair = (pairId: string): Promise<PairDetail> =>
  request<PairDetail>(`/pairs/${encodeURIComponent(pairId)}`);

export const searchPairs = (query: string, k: number): Promise<SearchResponse> =>
  request<SearchResponse>("/search", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ query, k }),
  });
