import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        include: ["tests/**/*.test.ts"],
        // parity and service tests spawn the Python engine; give them room
        testTimeout: 120_000,
        hookTimeout: 120_000,
    },
});
