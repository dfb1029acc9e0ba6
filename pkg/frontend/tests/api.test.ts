import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, fetchPair, searchPairs } from "../src/api";

function jsonResponse(data: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => data,
  } as unknown as Response;
}

afterEach(() => {
  vi.unstubAllGlobals();
  vi.unstubAllEnvs();
});

describe("searchPairs", () => {
  it("posts the query and k as a JSON body", async () => {
    const payload = { results: [], model_fingerprint: "abc", latency_s: 0.01 };
    const fetchMock = vi.fn(async () => jsonResponse(payload));
    vi.stubGlobal("fetch", fetchMock);

    const response = await searchPairs("larger noise", 5);

    expect(response).toEqual(payload);
    expect(fetchMock).toHaveBeenCalledWith("/search", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query: "larger noise", k: 5 }),
    });
  });

  it("surfaces the service's detail message on 4xx", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ detail: "'query' must be a non-empty string" }, 400)),
    );

    const err = await searchPairs("", 10).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.message).toBe("'query' must be a non-empty string");
  });

  it("falls back to a generic message when the error body is not JSON", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        ({
          ok: false,
          status: 500,
          json: async () => {
            throw new SyntaxError("not json");
          },
        }) as unknown as Response,
      ),
    );

    const err = await searchPairs("q", 1).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(500);
    expect(err.message).toBe("request failed with status 500");
  });

  it("maps a refused connection to a status-0 ApiError", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        throw new TypeError("fetch failed");
      }),
    );

    const err = await searchPairs("q", 1).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(0);
    expect(err.message).toContain("tsdiff serve");
  });
});

describe("fetchPair", () => {
  it("URL-encodes the pair id", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ pair_id: "a/b" }));
    vi.stubGlobal("fetch", fetchMock);

    await fetchPair("a/b");

    expect(fetchMock).toHaveBeenCalledWith("/pairs/a%2Fb", undefined);
  });
});

describe("API base configuration", () => {
  it("prefixes requests with VITE_API_BASE, trailing slash stripped", async () => {
    vi.stubEnv("VITE_API_BASE", "http://api.example:9000/");
    vi.resetModules();
    const fresh = await import("../src/api");
    const fetchMock = vi.fn(async () => jsonResponse({ status: "ready" }));
    vi.stubGlobal("fetch", fetchMock);

    await fresh.fetchHealth();

    expect(fetchMock).toHaveBeenCalledWith("http://api.example:9000/health", undefined);
  });
});
