import { defineConfig } from "vite";

export default defineConfig({
  build: { target: "es2022" },
  test: {
    environment: "jsdom",
    include: ["test/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
