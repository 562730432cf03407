import { defineConfig } from "vitest/config";

// every test shells out to the CLI; training commands need generous timeouts
export default defineConfig({
  test: {
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
