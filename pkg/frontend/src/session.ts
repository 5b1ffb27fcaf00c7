// DOM-free controller for a studio session. The browser layer forwards
// pointer, wheel, and form events here; scripted tests drive the same
// methods directly. The controller owns the pose log, the scanned wall
// plane, brush settings, and the packed artwork, and it derives every
// displayed mesh and statistic through the same stroke pipeline the
// service-side replay tool uses, so the numbers on screen are the numbers
// a replay of the exported pose log produces.
//
// Network calls are async and never touch drawing state until they
// resolve, so input handling stays responsive while saves or gallery
// fetches are in flight.

import { ApiError, ArtworkPage, StudioApi } from "./api.js";
import { BrushParams, makeBrush, sprayPressure } from "./engine/brush.js";
import * as config from "./engine/config.js";
import {
    Artwork,
    artworkMesh,
    decodeArtwork,
    encodeArtwork,
    gestureDrag,
    gestureScale,
    newArtworkId,
    packArtwork,
    placedMesh,
} from "./engine/gstb.js";
import { Centerline, PoseSample, Tool, formatPoseLog } from "./engine/pipeline.js";
import {
    CanvasPlane,
    DrawMode,
    fitPlane,
    formatScanSamples,
    planeOrigin,
    signedDistance,
} from "./engine/plane.js";
import {
    ReplayResult,
    ReplaySettings,
    ReplayStats,
    replay,
    replayStats,
} from "./engine/replay.js";
import { TriangleMesh, emptyMesh, triangleCount, vertexCount } from "./engine/tessellate.js";
import { Vec3, add, scale, sub } from "./engine/vec.js";

export type Phase = "login" | "mode" | "scan" | "draw" | "place" | "gallery";

const FRAME_DT = 1.0 / 60.0;
const IDENTITY_Q: [number, number, number, number] = [1.0, 0.0, 0.0, 0.0];

/** Brush override keys accepted by the settings form, matching the replay
 * tool's --brush flag so exported sessions can name identical overrides. */
const BRUSH_KEYS: Record<string, keyof Omit<BrushParams, "tool" | "color">> = {
    width: "baseWidth",
    base_width: "baseWidth",
    half_angle: "sprayConeHalfAngle",
    spray_cone_half_angle: "sprayConeHalfAngle",
    range: "sprayRange",
    spray_range: "sprayRange",
    drip_probability: "dripProbability",
    drip_max_length: "dripMaxLength",
};

export class SessionError extends Error {
    override name = "SessionError";
}

export interface LiveReadout {
    /** Signed nib distance to the wall, or null before a wall is scanned. */
    distance: number | null;
    /** Stroke width the pressure model will produce at this distance. */
    width: number;
}

export class StudioSession {
    phase: Phase = "login";
    author = "";
    token: string | null = null;
    mode: DrawMode = "3d";
    tool: Tool = "spray";
    plane: CanvasPlane | null = null;
    scanPoints: Vec3[] = [];
    poseLog: PoseSample[] = [];
    artwork: Artwork | null = null;
    selected = false;
    seed = 0n;

    /** Nib depth along world z, set by scroll or slider in free-3D mode. */
    depth = 0.1;

    private api: StudioApi | null;
    private tick = 0;
    private pointerActive = false;
    private lastTarget: Vec3 | null = null;
    private brushRaw = new Map<string, string>();
    private overrides: Partial<BrushParams> = {};
    private artworkId: string | null = null;
    private savedIds = new Set<string>();
    private pendingSaves = new Map<string, Promise<string>>();
    private lastResult: ReplayResult = { strokes: [], mesh: emptyMesh() };

    constructor(api: StudioApi | null = null) {
        this.api = api;
    }

    // -- login and mode select ----------------------------------------------

    async login(author: string): Promise<void> {
        if (this.phase !== "login") {
            throw new SessionError("already logged in");
        }
        if (!author.trim()) {
            throw new SessionError("author name must not be empty");
        }
        if (this.api !== null) {
            this.token = await this.api.createSession(author);
        }
        this.author = author;
        this.phase = "mode";
    }

    chooseMode(mode: DrawMode): void {
        if (this.phase !== "mode") {
            throw new SessionError("choose a mode after logging in");
        }
        this.mode = mode;
        this.phase = mode === "2d" ? "scan" : "draw";
    }

    // -- wall scan ----------------------------------------------------------

    scanAdd(p: Vec3): void {
        if (this.phase !== "scan") {
            throw new SessionError("not in the scan step");
        }
        this.scanPoints.push(p);
    }

    scanReset(): void {
        this.scanPoints = [];
        this.plane = null;
    }

    /** Fit the wall plane from the clicked points and move on to drawing.
     * Matches the replay tool's registration call exactly: default RMS
     * gate, no viewer direction hint. */
    finishScan(): CanvasPlane {
        if (this.phase !== "scan") {
            throw new SessionError("not in the scan step");
        }
        if (this.scanPoints.length < 3) {
            throw new SessionError("click at least 3 points on the wall");
        }
        this.plane = fitPlane(this.scanPoints, config.DEFAULT_SCAN_MAX_RMS, null);
        this.phase = "draw";
        return this.plane;
    }

    /** Corners of the fitted bounds rectangle, world space, for the
     * augmented overlay on the scan preview. */
    planePreviewCorners(): Vec3[] {
        if (this.plane === null) {
            throw new SessionError("no wall plane fitted yet");
        }
        const { uAxis, vAxis, bounds } = this.plane;
        const origin = planeOrigin(this.plane);
        const [uMin, uMax, vMin, vMax] = bounds;
        const corner = (u: number, v: number) => add(origin, add(scale(uAxis, u), scale(vAxis, v)));
        return [corner(uMin, vMin), corner(uMax, vMin), corner(uMax, vMax), corner(uMin, vMax)];
    }

    // -- brush and replay settings ------------------------------------------

    setTool(tool: Tool): void {
        this.tool = tool;
    }

    setSeed(seed: bigint): void {
        this.seed = seed;
        this.refresh();
    }

    setDepth(depth: number): void {
        if (!Number.isFinite(depth)) {
            throw new SessionError("depth must be finite");
        }
        this.depth = depth;
    }

    /** Apply one brush override, using the same key=value vocabulary as the
     * replay tool; the raw string is kept so the session can be exported as
     * an identical command line. */
    setBrush(key: string, value: string): void {
        if (key === "color") {
            const parts = value.split(",").map((v) => Number(v));
            if (parts.length < 3 || parts.length > 4 || parts.some((v) => Number.isNaN(v))) {
                throw new SessionError(`color needs r,g,b or r,g,b,a, got ${JSON.stringify(value)}`);
            }
            const [r, g, b, a = 1.0] = parts;
            this.overrides = { ...this.overrides, color: [r, g, b, a] };
        } else {
            const field = BRUSH_KEYS[key];
            if (field === undefined) {
                throw new SessionError(`unknown brush parameter ${JSON.stringify(key)}`);
            }
            const num = Number(value);
            if (Number.isNaN(num)) {
                throw new SessionError(`brush value for ${key} must be a number`);
            }
            this.overrides = { ...this.overrides, [field]: num };
        }
        // Validate eagerly so a bad override fails at the form, not mid-stroke.
        makeBrush("spray", this.overrides);
        makeBrush("drip", this.overrides);
        this.brushRaw.set(key, value);
        this.refresh();
    }

    settings(): ReplaySettings {
        return {
            mode: this.mode,
            brushes: {
                spray: makeBrush("spray", this.overrides),
                drip: makeBrush("drip", this.overrides),
            },
            nibOffset: config.DEFAULT_NIB_OFFSET,
            minSpacing: config.DEFAULT_MIN_SPACING,
            smoothWindow: config.DEFAULT_SMOOTH_WINDOW,
            tubeSides: config.DEFAULT_TUBE_SIDES,
            seed: this.seed,
        };
    }

    // -- drawing ------------------------------------------------------------

    /** Record one pose. The pointer position plus the depth wheel stand in
     * for a tracked 6-DoF device: the nib is placed at (x, y, depth) in
     * world space, the wand pose is that point minus the nib offset with an
     * identity orientation, and the clock advances one display frame per
     * event. */
    private appendSample(x: number, y: number, pressed: boolean): void {
        const target: Vec3 = [x, y, this.depth];
        const p = sub(target, config.DEFAULT_NIB_OFFSET);
        const t = this.tick * FRAME_DT;
        this.tick += 1;
        this.poseLog.push({ t, p, q: [...IDENTITY_Q], pressed, tool: this.tool });
        this.lastTarget = target;
    }

    pointerDown(x: number, y: number, depth?: number): void {
        if (this.phase !== "draw") {
            throw new SessionError("not in the draw step");
        }
        if (this.mode === "2d" && this.plane === null) {
            throw new SessionError("scan the wall before drawing in wall mode");
        }
        if (depth !== undefined) {
            this.setDepth(depth);
        }
        this.pointerActive = true;
        this.appendSample(x, y, true);
        this.refresh();
    }

    pointerMove(x: number, y: number): void {
        if (!this.pointerActive) {
            this.lastTarget = [x, y, this.depth];
            return;
        }
        this.appendSample(x, y, true);
        this.refresh();
    }

    pointerUp(x: number, y: number): void {
        if (!this.pointerActive) {
            return;
        }
        this.appendSample(x, y, false);
        this.pointerActive = false;
        this.refresh();
    }

    /** Re-run the pipeline over the whole log. Logs stay small enough at
     * display rate that this is cheap; the render loop just redraws the
     * latest mesh. */
    private refresh(): void {
        this.lastResult = replay(this.poseLog, this.settings(), this.plane);
    }

    drawMesh(): TriangleMesh {
        return this.lastResult.mesh;
    }

    /** The statistics shown in the draw HUD; the parity contract is that a
     * replay of the exported pose log reports these same counts. */
    stats(): ReplayStats {
        return replayStats(this.lastResult);
    }

    liveReadout(): LiveReadout {
        const brush = this.settings().brushes[this.tool];
        if (this.plane === null || this.lastTarget === null) {
            return { distance: null, width: brush.baseWidth };
        }
        const d = signedDistance(this.plane, this.lastTarget);
        let pressure = 1.0;
        if (this.tool === "spray") {
            const probe = new Centerline([this.lastTarget], [0.0], this.tool, [1.0]);
            pressure = sprayPressure(probe, this.plane, brush.sprayRange).pressure[0];
        }
        return { distance: d, width: brush.baseWidth * pressure };
    }

    // -- place gestures -----------------------------------------------------

    enterPlace(): void {
        if (this.artwork === null) {
            this.artwork = this.packCurrent("Untitled");
        }
        this.phase = "place";
    }

    backToDraw(): void {
        this.phase = "draw";
    }

    tapSelect(): void {
        if (this.artwork === null) {
            throw new SessionError("nothing to select");
        }
        this.selected = true;
    }

    tapClear(): void {
        this.selected = false;
    }

    dragBy(delta: Vec3): void {
        if (this.artwork === null || !this.selected) {
            throw new SessionError("tap the artwork before dragging");
        }
        this.artwork = gestureDrag(this.artwork, delta);
    }

    pinchBy(factor: number, midpoint: Vec3): void {
        if (this.artwork === null || !this.selected) {
            throw new SessionError("tap the artwork before pinching");
        }
        this.artwork = gestureScale(this.artwork, factor, midpoint);
    }

    placedMeshNow(): TriangleMesh {
        if (this.artwork === null) {
            throw new SessionError("no artwork to place");
        }
        return placedMesh(this.artwork, config.DEFAULT_TUBE_SIDES);
    }

    // -- persistence --------------------------------------------------------

    /** Freeze the current drawing into the artwork model, keeping any
     * placement edits and the session's artwork identity. */
    packCurrent(title: string): Artwork {
        if (this.artworkId === null) {
            this.artworkId = newArtworkId();
        }
        const packed = packArtwork(
            this.poseLog,
            this.settings(),
            this.mode === "2d" ? this.plane : null,
            this.artworkId,
            this.author,
            title,
        );
        if (this.artwork !== null && this.artwork.artworkId === this.artworkId) {
            return { ...packed, placement: this.artwork.placement };
        }
        return packed;
    }

    /** Statistics for the artwork model as stored: stroke count and the
     * counts of the mesh its strokes re-tessellate to. */
    artworkStats(): ReplayStats {
        if (this.artwork === null) {
            throw new SessionError("no artwork loaded");
        }
        const mesh = artworkMesh(this.artwork, config.DEFAULT_TUBE_SIDES);
        let arc = 0.0;
        for (const s of this.artwork.strokes) {
            arc += s.centerline.arcLength();
        }
        return {
            strokes: this.artwork.strokes.length,
            vertices: vertexCount(mesh),
            triangles: triangleCount(mesh),
            arc_length: arc,
        };
    }

    artworkMeshNow(): TriangleMesh {
        if (this.artwork === null) {
            throw new SessionError("no artwork loaded");
        }
        return artworkMesh(this.artwork, config.DEFAULT_TUBE_SIDES);
    }

    /** Encode and upload. At most one save per artwork is ever in flight:
     * a second call while the first is pending joins it instead of issuing
     * another POST. Saving again after a successful save mints a new
     * artwork identity, since stored artworks are immutable. */
    save(title: string): Promise<string> {
        if (this.api === null || this.token === null) {
            return Promise.reject(new SessionError("not connected to a studio service"));
        }
        if (this.artworkId !== null && this.savedIds.has(this.artworkId)) {
            this.artworkId = null;
        }
        const art = this.poseLog.length > 0 || this.artwork === null ? this.packCurrent(title) : this.artwork;
        this.artwork = art;
        const pending = this.pendingSaves.get(art.artworkId);
        if (pending !== undefined) {
            return pending;
        }
        const upload = this.api
            .uploadArtwork(this.token, encodeArtwork(art))
            .then((id) => {
                this.savedIds.add(id);
                return id;
            })
            .finally(() => {
                this.pendingSaves.delete(art.artworkId);
            });
        this.pendingSaves.set(art.artworkId, upload);
        return upload;
    }

    async galleryPage(after?: string): Promise<ArtworkPage> {
        if (this.api === null) {
            throw new SessionError("not connected to a studio service");
        }
        this.phase = "gallery";
        return this.api.listArtworks(after === undefined ? {} : { after });
    }

    async loadArtwork(artworkId: string): Promise<Artwork> {
        if (this.api === null) {
            throw new SessionError("not connected to a studio service");
        }
        const { data, checksum } = await this.api.fetchArtwork(artworkId);
        if (checksum !== null && crc32Hex(data) !== checksum) {
            throw new ApiError(`artwork ${artworkId} failed its checksum`, 0);
        }
        return this.loadFromBytes(data);
    }

    /** Install a decoded artwork as the session's current piece; the mesh
     * shown is re-tessellated purely from the stored model. */
    loadFromBytes(data: Uint8Array): Artwork {
        const art = decodeArtwork(data);
        this.artwork = art;
        this.artworkId = art.artworkId;
        this.savedIds.add(art.artworkId);
        this.mode = art.strokes.length > 0 ? art.strokes[0].mode : art.canvas !== null ? "2d" : "3d";
        this.plane = art.canvas;
        this.poseLog = [];
        this.lastResult = { strokes: [], mesh: emptyMesh() };
        this.selected = false;
        this.phase = "place";
        return art;
    }

    async deleteArtwork(artworkId: string): Promise<void> {
        if (this.api === null || this.token === null) {
            throw new SessionError("not connected to a studio service");
        }
        await this.api.deleteArtwork(this.token, artworkId);
    }

    // -- export -------------------------------------------------------------

    /** The session's pose stream as JSON Lines, replayable by the server
     * package's replay tool. */
    exportPoseLog(): string {
        return formatPoseLog(this.poseLog);
    }

    exportScan(): string {
        return formatScanSamples(this.scanPoints);
    }

    /** Arguments (after the pose-log path) for `gesto replay` that
     * reproduce this session's settings. */
    replayArgs(): string[] {
        const args = [
            "--mode",
            this.mode,
            "--seed",
            String(this.seed),
            "--spacing",
            String(config.DEFAULT_MIN_SPACING),
            "--smooth-window",
            String(config.DEFAULT_SMOOTH_WINDOW),
            "--sides",
            String(config.DEFAULT_TUBE_SIDES),
        ];
        if (this.brushRaw.size > 0) {
            // One --brush flag taking every pair: the replay tool's parser
            // would keep only the last flag if they were repeated.
            args.push("--brush");
            for (const [key, value] of this.brushRaw) {
                args.push(`${key}=${value}`);
            }
        }
        return args;
    }
}

// CRC-32 (the common reflected polynomial), matching the checksum the
// service sends in X-Checksum-CRC32.
const CRC_TABLE = (() => {
    const table = new Uint32Array(256);
    for (let n = 0; n < 256; n++) {
        let c = n;
        for (let k = 0; k < 8; k++) {
            c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
        }
        table[n] = c >>> 0;
    }
    return table;
})();

export function crc32Hex(data: Uint8Array): string {
    let c = 0xffffffff;
    for (let i = 0; i < data.length; i++) {
        c = CRC_TABLE[(c ^ data[i]) & 0xff] ^ (c >>> 8);
    }
    return ((c ^ 0xffffffff) >>> 0).toString(16).padStart(8, "0");
}
