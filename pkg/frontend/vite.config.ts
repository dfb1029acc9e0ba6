import { defineConfig } from "vitest/config";

// dev server proxies API routes to a locally running `tsdiff serve` so the
// page works without VITE_API_BASE; production builds read the env var.
const API_TARGET = "http://127.0.0.1:8080";

export default defineConfig({
  server: {
    proxy: Object.fromEntries(
      ["/health", "/labels", "/pairs", "/search"].map((route) => [route, API_TARGET]),
    ),
  },
  test: {
    environment: "jsdom",
  },
});
