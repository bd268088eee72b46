import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    environment: "node",
    // The integration suite boots the study server once; generous but bounded.
    testTimeout: 60_000,
    hookTimeout: 120_000,
  },
});
