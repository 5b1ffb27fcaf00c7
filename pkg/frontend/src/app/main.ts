// Browser entry point: wires the DOM screens to a StudioSession. All
// geometry, persistence, and statistics live in the session and the
// engine modules; this file only translates events and paints the canvas.
//
// One requestAnimationFrame loop repaints the scene; network calls run
// through async handlers and never block pointer input.

import { ArtworkSummary } from "../api.js";
import { StudioApi } from "../api.js";
import { StudioSession } from "../session.js";
import {
    Viewport,
    defaultViewport,
    renderMarkers,
    renderMesh,
    renderPolyline,
    screenToWorld,
} from "./render.js";

function byId<T extends HTMLElement>(id: string): T {
    const el = document.getElementById(id);
    if (el === null) {
        throw new Error(`missing element #${id}`);
    }
    return el as T;
}

interface ActivePointer {
    x: number;
    y: number;
}

function init(): void {
    const canvas = byId<HTMLCanvasElement>("stage");
    const ctx = canvas.getContext("2d");
    if (ctx === null) {
        throw new Error("2d canvas unavailable");
    }
    const view: Viewport = defaultViewport(canvas.width, canvas.height);

    const status = byId<HTMLElement>("status");
    const screens = {
        login: byId<HTMLElement>("screen-login"),
        mode: byId<HTMLElement>("screen-mode"),
        scan: byId<HTMLElement>("screen-scan"),
        draw: byId<HTMLElement>("screen-draw"),
        place: byId<HTMLElement>("screen-place"),
        gallery: byId<HTMLElement>("screen-gallery"),
    };

    let session = new StudioSession(null);

    const report = (err: unknown) => {
        status.textContent = err instanceof Error ? err.message : String(err);
    };
    const clearStatus = () => {
        status.textContent = "";
    };

    function showScreen(): void {
        for (const [name, el] of Object.entries(screens)) {
            el.hidden = name !== session.phase;
        }
    }

    // -- login --------------------------------------------------------------

    byId<HTMLButtonElement>("login-go").addEventListener("click", () => {
        const author = byId<HTMLInputElement>("login-author").value;
        const server = byId<HTMLInputElement>("login-server").value.trim();
        session = new StudioSession(server ? new StudioApi(server) : null);
        session
            .login(author)
            .then(() => {
                clearStatus();
                showScreen();
            })
            .catch(report);
    });

    // -- mode select --------------------------------------------------------

    byId<HTMLButtonElement>("mode-2d").addEventListener("click", () => {
        session.chooseMode("2d");
        showScreen();
    });
    byId<HTMLButtonElement>("mode-3d").addEventListener("click", () => {
        session.chooseMode("3d");
        showScreen();
    });

    // -- scan ---------------------------------------------------------------

    byId<HTMLButtonElement>("scan-done").addEventListener("click", () => {
        try {
            session.finishScan();
            clearStatus();
            showScreen();
        } catch (err) {
            report(err);
        }
    });
    byId<HTMLButtonElement>("scan-reset").addEventListener("click", () => {
        session.scanReset();
    });

    // -- draw controls ------------------------------------------------------

    const statsEl = byId<HTMLElement>("draw-stats");
    const readoutEl = byId<HTMLElement>("draw-readout");

    byId<HTMLSelectElement>("draw-tool").addEventListener("change", (ev) => {
        session.setTool((ev.target as HTMLSelectElement).value === "drip" ? "drip" : "spray");
    });
    const depthSlider = byId<HTMLInputElement>("draw-depth");
    depthSlider.addEventListener("input", () => {
        session.setDepth(Number(depthSlider.value));
    });
    byId<HTMLInputElement>("draw-seed").addEventListener("change", (ev) => {
        try {
            session.setSeed(BigInt((ev.target as HTMLInputElement).value || "0"));
        } catch (err) {
            report(err);
        }
    });
    for (const key of ["width", "color", "range", "drip_probability", "drip_max_length"]) {
        const input = byId<HTMLInputElement>(`brush-${key}`);
        input.addEventListener("change", () => {
            if (!input.value.trim()) {
                return;
            }
            try {
                session.setBrush(key, input.value.trim());
                clearStatus();
            } catch (err) {
                report(err);
            }
        });
    }

    byId<HTMLButtonElement>("draw-place").addEventListener("click", () => {
        session.enterPlace();
        showScreen();
    });
    byId<HTMLButtonElement>("place-back").addEventListener("click", () => {
        session.backToDraw();
        showScreen();
    });

    // -- save ---------------------------------------------------------------

    const saveButton = byId<HTMLButtonElement>("draw-save");
    saveButton.addEventListener("click", () => {
        const title = byId<HTMLInputElement>("save-title").value || "Untitled";
        saveButton.disabled = true;
        session
            .save(title)
            .then((id) => {
                status.textContent = `saved as ${id}`;
            })
            .catch(report)
            .finally(() => {
                saveButton.disabled = false;
            });
    });

    // -- downloads ----------------------------------------------------------

    function download(name: string, text: string): void {
        const blob = new Blob([text], { type: "application/jsonl" });
        const url = URL.createObjectURL(blob);
        const a = document.createElement("a");
        a.href = url;
        a.download = name;
        a.click();
        URL.revokeObjectURL(url);
    }

    byId<HTMLButtonElement>("export-poses").addEventListener("click", () => {
        download("poses.jsonl", session.exportPoseLog());
        const args = ["gesto", "replay", "--poses", "poses.jsonl", ...session.replayArgs()];
        if (session.mode === "2d") {
            args.push("--scan", "scan.jsonl");
        }
        byId<HTMLElement>("export-hint").textContent = args.join(" ");
    });
    byId<HTMLButtonElement>("export-scan").addEventListener("click", () => {
        download("scan.jsonl", session.exportScan());
    });

    // -- gallery ------------------------------------------------------------

    const galleryList = byId<HTMLElement>("gallery-list");
    let galleryCursor: string | null = null;

    function renderGallery(items: ArtworkSummary[]): void {
        galleryList.textContent = "";
        for (const item of items) {
            const row = document.createElement("div");
            row.className = "gallery-row";
            const label = document.createElement("span");
            label.textContent = `${item.title} by ${item.author} (${item.byte_len} bytes)`;
            const load = document.createElement("button");
            load.textContent = "Load";
            load.addEventListener("click", () => {
                session
                    .loadArtwork(item.artwork_id)
                    .then(() => {
                        clearStatus();
                        showScreen();
                    })
                    .catch(report);
            });
            const del = document.createElement("button");
            del.textContent = "Delete";
            del.addEventListener("click", () => {
                session
                    .deleteArtwork(item.artwork_id)
                    .then(() => refreshGallery(undefined))
                    .catch(report);
            });
            row.append(label, load, del);
            galleryList.append(row);
        }
    }

    function refreshGallery(after: string | undefined): void {
        session
            .galleryPage(after)
            .then((page) => {
                galleryCursor = page.next;
                byId<HTMLButtonElement>("gallery-next").disabled = page.next === null;
                renderGallery(page.items);
                showScreen();
            })
            .catch(report);
    }

    byId<HTMLButtonElement>("draw-gallery").addEventListener("click", () => refreshGallery(undefined));
    byId<HTMLButtonElement>("gallery-next").addEventListener("click", () => {
        if (galleryCursor !== null) {
            refreshGallery(galleryCursor);
        }
    });
    byId<HTMLButtonElement>("gallery-back").addEventListener("click", () => {
        session.backToDraw();
        showScreen();
    });

    // -- pointer handling ---------------------------------------------------

    const pointers = new Map<number, ActivePointer>();

    function canvasXY(ev: PointerEvent): [number, number] {
        const rect = canvas.getBoundingClientRect();
        return [ev.clientX - rect.left, ev.clientY - rect.top];
    }

    canvas.addEventListener("pointerdown", (ev) => {
        const [sx, sy] = canvasXY(ev);
        pointers.set(ev.pointerId, { x: sx, y: sy });
        canvas.setPointerCapture(ev.pointerId);
        try {
            if (session.phase === "scan") {
                // The demo stages the wall on the z=0 plane; a deployment
                // with a real scanner substitutes measured hit points here.
                session.scanAdd(screenToWorld(view, sx, sy, 0.0));
            } else if (session.phase === "draw") {
                const [wx, wy] = screenToWorld(view, sx, sy, session.depth);
                session.pointerDown(wx, wy);
            } else if (session.phase === "place" && pointers.size === 1) {
                session.tapSelect();
            }
        } catch (err) {
            report(err);
        }
    });

    canvas.addEventListener("pointermove", (ev) => {
        const [sx, sy] = canvasXY(ev);
        const prev = pointers.get(ev.pointerId);
        try {
            if (session.phase === "draw") {
                const [wx, wy] = screenToWorld(view, sx, sy, session.depth);
                session.pointerMove(wx, wy);
            } else if (session.phase === "place" && prev !== undefined && session.selected) {
                if (pointers.size === 1) {
                    const from = screenToWorld(view, prev.x, prev.y, 0.0);
                    const to = screenToWorld(view, sx, sy, 0.0);
                    session.dragBy([to[0] - from[0], to[1] - from[1], 0.0]);
                } else if (pointers.size === 2) {
                    const other = [...pointers.entries()].find(([id]) => id !== ev.pointerId);
                    if (other !== undefined) {
                        const [, o] = other;
                        const before = Math.hypot(prev.x - o.x, prev.y - o.y);
                        const now = Math.hypot(sx - o.x, sy - o.y);
                        if (before > 1 && now > 1) {
                            const mid = screenToWorld(view, (sx + o.x) / 2, (sy + o.y) / 2, 0.0);
                            session.pinchBy(now / before, mid);
                        }
                    }
                }
            }
        } catch (err) {
            report(err);
        }
        if (prev !== undefined) {
            prev.x = sx;
            prev.y = sy;
        }
    });

    const endPointer = (ev: PointerEvent) => {
        pointers.delete(ev.pointerId);
        if (session.phase === "draw") {
            const [sx, sy] = canvasXY(ev);
            const [wx, wy] = screenToWorld(view, sx, sy, session.depth);
            session.pointerUp(wx, wy);
        }
    };
    canvas.addEventListener("pointerup", endPointer);
    canvas.addEventListener("pointercancel", endPointer);

    canvas.addEventListener(
        "wheel",
        (ev) => {
            if (session.phase !== "draw") {
                return;
            }
            ev.preventDefault();
            const next = session.depth + ev.deltaY * 0.0005;
            session.setDepth(Math.max(-1.0, Math.min(1.0, next)));
            depthSlider.value = String(session.depth);
        },
        { passive: false },
    );

    // -- render loop --------------------------------------------------------

    function paint(): void {
        ctx!.clearRect(0, 0, canvas.width, canvas.height);
        try {
            if (session.phase === "scan") {
                renderMarkers(ctx!, view, session.scanPoints, "#2a7");
                if (session.plane !== null) {
                    renderPolyline(ctx!, view, session.planePreviewCorners(), "#2a7", true);
                }
            } else if (session.phase === "draw") {
                if (session.plane !== null) {
                    renderPolyline(ctx!, view, session.planePreviewCorners(), "#555", true);
                }
                renderMesh(ctx!, session.drawMesh(), view);
                const s = session.stats();
                statsEl.textContent =
                    `strokes=${s.strokes} vertices=${s.vertices} ` +
                    `triangles=${s.triangles} arc=${s.arc_length.toFixed(4)}`;
                const live = session.liveReadout();
                readoutEl.textContent =
                    live.distance === null
                        ? `depth=${session.depth.toFixed(3)} width=${live.width.toFixed(4)}`
                        : `wall distance=${live.distance.toFixed(3)} width=${live.width.toFixed(4)}`;
            } else if (session.phase === "place" && session.artwork !== null) {
                renderMesh(ctx!, session.placedMeshNow(), view);
            }
        } catch (err) {
            report(err);
        }
        requestAnimationFrame(paint);
    }

    showScreen();
    requestAnimationFrame(paint);
}

init();
