import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      // The engine service; run `vizsketch serve` next to `npm run dev`.
      "/synthesize": "http://127.0.0.1:8000",
      "/health": "http://127.0.0.1:8000",
      "/version": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
  },
});
