import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the end-to-end suite drives a real service process
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
