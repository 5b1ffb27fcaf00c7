// End-to-end against a real service process: the suite starts the server
// package's HTTP service on a free port with a throwaway data directory,
// then drives login, save, gallery, load, and delete through the same
// client and controller the browser uses. Everything crosses the wire;
// nothing reaches into the service's storage directly.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, StudioApi } from "../src/api.js";
import { StudioSession, crc32Hex } from "../src/session.js";
import { Vec3 } from "../src/engine/vec.js";

const HERE = fileURLToPath(new URL(".", import.meta.url));
const SERVER_PKG = resolve(HERE, "..", "..");

let tmp: string;
let proc: ChildProcess | null = null;
let baseUrl: string;
let api: StudioApi;

function freePort(): Promise<number> {
    return new Promise((resolvePort, reject) => {
        const srv = createServer();
        srv.once("error", reject);
        srv.listen(0, "127.0.0.1", () => {
            const addr = srv.address();
            if (addr === null || typeof addr === "string") {
                reject(new Error("no port assigned"));
                return;
            }
            srv.close(() => resolvePort(addr.port));
        });
    });
}

async function waitHealthy(url: string, tries = 100): Promise<void> {
    for (let i = 0; i < tries; i++) {
        try {
            const resp = await fetch(`${url}/v1/health`);
            if (resp.ok) {
                return;
            }
        } catch {
            // not up yet
        }
        await new Promise((r) => setTimeout(r, 150));
    }
    throw new Error(`service at ${url} never became healthy`);
}

beforeAll(async () => {
    tmp = mkdtempSync(join(tmpdir(), "gesto-service-"));
    const port = await freePort();
    baseUrl = `http://127.0.0.1:${port}`;
    proc = spawn("python3", ["-m", "gesto.service"], {
        cwd: SERVER_PKG,
        env: {
            ...process.env,
            PYTHONPATH: join(SERVER_PKG, "src"),
            GESTO_ADDR: `127.0.0.1:${port}`,
            GESTO_DATA_DIR: join(tmp, "data"),
        },
        stdio: ["ignore", "pipe", "pipe"],
    });
    await waitHealthy(baseUrl);
    api = new StudioApi(baseUrl);
}, 60_000);

afterAll(async () => {
    if (proc !== null) {
        proc.kill("SIGTERM");
        await new Promise((r) => setTimeout(r, 300));
        if (proc.exitCode === null) {
            proc.kill("SIGKILL");
        }
    }
    rmSync(tmp, { recursive: true, force: true });
});

const WALL_CLICKS: Vec3[] = [
    [0.0, 0.0, 0.0],
    [0.8, 0.0, 0.0],
    [0.8, 0.6, 0.0],
    [0.0, 0.6, 0.0],
];

async function drawnSession(author: string): Promise<StudioSession> {
    const session = new StudioSession(api);
    await session.login(author);
    session.chooseMode("2d");
    for (const p of WALL_CLICKS) {
        session.scanAdd(p);
    }
    session.finishScan();
    session.pointerDown(0.1, 0.4, 0.08);
    for (let i = 1; i <= 15; i++) {
        session.pointerMove(0.1 + i * 0.03, 0.4 + 0.01 * Math.sin(i));
    }
    session.pointerUp(0.55, 0.4);
    return session;
}

describe("studio against a live service", () => {
    it("logs in, saves, lists, reloads with identical statistics, deletes", async () => {
        const session = await drawnSession("vera");
        const live = session.stats();
        expect(live.strokes).toBe(1);

        const id = await session.save("roundtrip piece");
        expect(id).toMatch(/^[0-9a-f-]{36}$/);

        const page = await session.galleryPage();
        const entry = page.items.find((a) => a.artwork_id === id);
        expect(entry).toBeDefined();
        expect(entry!.author).toBe("vera");
        expect(entry!.title).toBe("roundtrip piece");

        const { data, checksum } = await api.fetchArtwork(id);
        expect(entry!.byte_len).toBe(data.length);
        expect(checksum).toBe(crc32Hex(data));

        const viewer = new StudioSession(api);
        await viewer.login("onlooker");
        const art = await viewer.loadArtwork(id);
        expect(art.title).toBe("roundtrip piece");
        const loaded = viewer.artworkStats();
        expect(loaded.strokes).toBe(live.strokes);
        expect(loaded.vertices).toBe(live.vertices);
        expect(loaded.triangles).toBe(live.triangles);

        await session.deleteArtwork(id);
        await expect(api.fetchArtwork(id)).rejects.toMatchObject({ status: 404 });
    });

    it("issues a single POST for concurrent saves of one artwork", async () => {
        const session = await drawnSession("nico");
        const first = session.save("only once");
        const second = session.save("only once");
        expect(second).toBe(first);
        const id = await first;
        expect(await second).toBe(id);

        const page = await api.listArtworks({ author: "nico" });
        expect(page.items.length).toBe(1);
        await session.deleteArtwork(id);
    });

    it("mints a new identity when saving again after more drawing", async () => {
        const session = await drawnSession("mara");
        const id1 = await session.save("first pass");
        session.backToDraw();
        session.pointerDown(0.2, 0.2, 0.08);
        session.pointerMove(0.3, 0.22);
        session.pointerUp(0.35, 0.22);
        const id2 = await session.save("second pass");
        expect(id2).not.toBe(id1);

        const page = await api.listArtworks({ author: "mara" });
        expect(page.items.map((a) => a.artwork_id).sort()).toEqual([id1, id2].sort());
        await session.deleteArtwork(id1);
        await session.deleteArtwork(id2);
    });

    it("pages the gallery with the keyset cursor", async () => {
        const ids: string[] = [];
        const session = new StudioSession(api);
        await session.login("pager");
        for (let k = 0; k < 3; k++) {
            const s = await drawnSession("pager");
            ids.push(await s.save(`page piece ${k}`));
        }
        const first = await api.listArtworks({ author: "pager", limit: 2 });
        expect(first.items.length).toBe(2);
        expect(first.next).not.toBeNull();
        const rest = await api.listArtworks({ author: "pager", limit: 2, after: first.next! });
        expect(rest.items.length).toBe(1);
        const seen = [...first.items, ...rest.items].map((a) => a.artwork_id).sort();
        expect(seen).toEqual([...ids].sort());
        // Ownership is by author, so this session can clean all three up.
        for (const id of ids) {
            await session.deleteArtwork(id);
        }
    });

    it("rejects uploads with a bogus token", async () => {
        const bytes = new TextEncoder().encode("GSTB junk");
        await expect(api.uploadArtwork("not-a-token", bytes)).rejects.toBeInstanceOf(ApiError);
        await expect(api.uploadArtwork("not-a-token", bytes)).rejects.toMatchObject({ status: 401 });
    });

    it("reports health with an artwork count", async () => {
        const health = await api.health();
        expect(health.status).toBe("ok");
        expect(typeof health.artworks).toBe("number");
    });
});
