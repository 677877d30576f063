import { defineConfig } from "vitest/config";

// Flow tests spawn a real service process, so timeouts cover interpreter
// startup, not just the HTTP round trips.
export default defineConfig({
  test: {
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
