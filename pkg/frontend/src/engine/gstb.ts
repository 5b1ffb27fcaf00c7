// The persistent artwork aggregate and its GSTB v1 binary codec, byte for
// byte compatible with the service's wire format (see the server repo's
// docs/gstb_format.md). Little-endian throughout; stroke geometry and
// brush floats are float32 on the wire and quantized with Math.fround at
// stroke construction, while canvas, placement, and created_at stay
// float64 so gesture laws hold at full precision.

import { BrushParams, makeBrush } from "./brush.js";
import * as config from "./config.js";
import { DripSeed, dripCenterlineForSeed } from "./drips.js";
import { Centerline, PoseSample, Tool } from "./pipeline.js";
import { CanvasPlane, DrawMode } from "./plane.js";
import { brushForTool, replay, ReplaySettings } from "./replay.js";
import { mergeMeshes, tessellateRibbon, tessellateTube, transformMesh, TriangleMesh } from "./tessellate.js";
import { Quat, quatIsUnit, quatToMatrix, Vec3 } from "./vec.js";

export const MAGIC = "GSTB";
export const FORMAT_VERSION = 1;

export class FormatError extends Error {
    override name = "FormatError";
}

export class VersionError extends FormatError {
    override name = "VersionError";
}

export class CorruptionError extends FormatError {
    constructor(message: string, readonly offset: number) {
        super(`corruption at byte ${offset}: ${message}`);
        this.name = "CorruptionError";
    }
}

export interface PlacementTransform {
    translation: Vec3;
    rotation: Quat;
    scale: number;
}

export function identityPlacement(): PlacementTransform {
    return { translation: [0.0, 0.0, 0.0], rotation: [1.0, 0.0, 0.0, 0.0], scale: 1.0 };
}

export interface Stroke {
    id: number;
    centerline: Centerline;
    brush: BrushParams;
    mode: DrawMode;
    drips: DripSeed[];
}

export interface Artwork {
    artworkId: string;
    author: string;
    title: string;
    createdAt: number;
    canvas: CanvasPlane | null;
    strokes: Stroke[];
    placement: PlacementTransform;
}

const f32 = Math.fround;

function q32Vec(v: Vec3): Vec3 {
    return [f32(v[0]), f32(v[1]), f32(v[2])];
}

/** Build a stroke with its geometry and brush quantized to float32, the
 * precision of the binary stroke section. */
export function makeStroke(
    id: number,
    centerline: Centerline,
    brush: BrushParams,
    mode: DrawMode,
    drips: DripSeed[] = [],
): Stroke {
    if (!(id >= 0 && Number.isSafeInteger(id))) {
        throw new Error(`stroke id must be a small nonnegative integer, got ${id}`);
    }
    const line = new Centerline(
        centerline.points.map(q32Vec),
        centerline.timestamps.map(f32),
        centerline.tool,
        centerline.pressure.map(f32),
    );
    const qBrush: BrushParams = {
        tool: brush.tool,
        baseWidth: f32(brush.baseWidth),
        color: [f32(brush.color[0]), f32(brush.color[1]), f32(brush.color[2]), f32(brush.color[3])],
        sprayConeHalfAngle: f32(brush.sprayConeHalfAngle),
        sprayRange: f32(brush.sprayRange),
        dripProbability: f32(brush.dripProbability),
        dripMaxLength: f32(brush.dripMaxLength),
    };
    const qDrips = drips.map((d) => ({
        anchor: q32Vec(d.anchor),
        length: f32(d.length),
        width: f32(d.width),
    }));
    return { id, centerline: line, brush: qBrush, mode, drips: qDrips };
}

export function newArtworkId(): string {
    return crypto.randomUUID();
}

const UUID_RE = /^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$/;

export function canonicalUuid(id: string): string {
    const hex = id.replace(/-/g, "").toLowerCase();
    if (!/^[0-9a-f]{32}$/.test(hex)) {
        throw new Error(`not a valid UUID: ${JSON.stringify(id)}`);
    }
    const parts = [hex.slice(0, 8), hex.slice(8, 12), hex.slice(12, 16), hex.slice(16, 20), hex.slice(20)];
    const out = parts.join("-");
    if (!UUID_RE.test(out)) {
        throw new Error(`not a valid UUID: ${JSON.stringify(id)}`);
    }
    return out;
}

export function makeArtwork(fields: {
    artworkId: string;
    author: string;
    title: string;
    createdAt: number;
    canvas?: CanvasPlane | null;
    strokes?: Stroke[];
    placement?: PlacementTransform;
}): Artwork {
    const encoder = new TextEncoder();
    if (encoder.encode(fields.author).length > config.MAX_AUTHOR_BYTES) {
        throw new Error(`author exceeds ${config.MAX_AUTHOR_BYTES} bytes`);
    }
    if (encoder.encode(fields.title).length > config.MAX_TITLE_BYTES) {
        throw new Error(`title exceeds ${config.MAX_TITLE_BYTES} bytes`);
    }
    if (!(fields.createdAt >= 0.0 && Number.isFinite(fields.createdAt))) {
        throw new Error(`created_at must be a nonnegative time, got ${fields.createdAt}`);
    }
    const strokes = fields.strokes ?? [];
    const ids = new Set(strokes.map((s) => s.id));
    if (ids.size !== strokes.length) {
        throw new Error("stroke ids must be unique within an artwork");
    }
    return {
        artworkId: canonicalUuid(fields.artworkId),
        author: fields.author,
        title: fields.title,
        createdAt: fields.createdAt,
        canvas: fields.canvas ?? null,
        strokes,
        placement: fields.placement ?? identityPlacement(),
    };
}

// ---------------------------------------------------------------------------
// Gestures: every placement edit goes through these model operations.

export function gestureDrag(artwork: Artwork, delta: Vec3): Artwork {
    if (!delta.every(Number.isFinite)) {
        throw new Error("drag delta must be finite");
    }
    const t = artwork.placement.translation;
    return {
        ...artwork,
        placement: {
            ...artwork.placement,
            translation: [t[0] + delta[0], t[1] + delta[1], t[2] + delta[2]],
        },
    };
}

/** Uniform scale about a world-space pivot: p -> pivot + factor*(p - pivot),
 * folded entirely into the placement. */
export function gestureScale(artwork: Artwork, factor: number, pivot: Vec3): Artwork {
    if (!(factor > 0.0 && Number.isFinite(factor))) {
        throw new Error(`scale factor must be positive and finite, got ${factor}`);
    }
    const old = artwork.placement;
    const t = old.translation;
    return {
        ...artwork,
        placement: {
            translation: [
                pivot[0] + factor * (t[0] - pivot[0]),
                pivot[1] + factor * (t[1] - pivot[1]),
                pivot[2] + factor * (t[2] - pivot[2]),
            ],
            rotation: old.rotation,
            scale: factor * old.scale,
        },
    };
}

// ---------------------------------------------------------------------------
// Binary encoding.

class ByteWriter {
    private buf = new Uint8Array(256);
    private len = 0;
    private scratch = new DataView(new ArrayBuffer(8));

    private grow(extra: number) {
        if (this.len + extra <= this.buf.length) {
            return;
        }
        let size = this.buf.length * 2;
        while (size < this.len + extra) {
            size *= 2;
        }
        const next = new Uint8Array(size);
        next.set(this.buf.subarray(0, this.len));
        this.buf = next;
    }

    raw(bytes: Uint8Array) {
        this.grow(bytes.length);
        this.buf.set(bytes, this.len);
        this.len += bytes.length;
    }

    private scratchOut(n: number) {
        this.grow(n);
        for (let i = 0; i < n; i++) {
            this.buf[this.len + i] = this.scratch.getUint8(i);
        }
        this.len += n;
    }

    u8(v: number) {
        this.grow(1);
        this.buf[this.len++] = v & 0xff;
    }

    u16(v: number) {
        this.scratch.setUint16(0, v, true);
        this.scratchOut(2);
    }

    u32(v: number) {
        this.scratch.setUint32(0, v >>> 0, true);
        this.scratchOut(4);
    }

    u64(v: bigint) {
        this.scratch.setBigUint64(0, v, true);
        this.scratchOut(8);
    }

    f32(v: number) {
        this.scratch.setFloat32(0, v, true);
        this.scratchOut(4);
    }

    f64(v: number) {
        this.scratch.setFloat64(0, v, true);
        this.scratchOut(8);
    }

    string(s: string) {
        const data = new TextEncoder().encode(s);
        this.u16(data.length);
        this.raw(data);
    }

    bytes(): Uint8Array {
        return this.buf.slice(0, this.len);
    }
}

function uuidBytes(id: string): Uint8Array {
    const hex = id.replace(/-/g, "");
    const out = new Uint8Array(16);
    for (let i = 0; i < 16; i++) {
        out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
    }
    return out;
}

function uuidFromBytes(bytes: Uint8Array): string {
    let hex = "";
    for (const b of bytes) {
        hex += b.toString(16).padStart(2, "0");
    }
    return canonicalUuid(hex);
}

const TOOL_CODES: Record<Tool, number> = { spray: 0, drip: 1 };
const MODE_CODES: Record<DrawMode, number> = { "2d": 0, "3d": 1 };

function encodeHeader(a: Artwork): Uint8Array {
    const w = new ByteWriter();
    w.raw(uuidBytes(a.artworkId));
    w.string(a.author);
    w.string(a.title);
    w.f64(a.createdAt);
    w.u8(a.canvas !== null ? 1 : 0);
    w.u32(a.strokes.length);
    return w.bytes();
}

function encodeCanvas(c: CanvasPlane): Uint8Array {
    const w = new ByteWriter();
    for (const v of c.normal) w.f64(v);
    w.f64(c.offset);
    for (const v of c.uAxis) w.f64(v);
    for (const v of c.vAxis) w.f64(v);
    for (const v of c.bounds) w.f64(v);
    w.f64(c.fitRms);
    return w.bytes();
}

function encodeStrokes(strokes: Stroke[]): Uint8Array {
    const w = new ByteWriter();
    for (const s of strokes) {
        w.u64(BigInt(s.id));
        w.u8(TOOL_CODES[s.centerline.tool]);
        w.u8(MODE_CODES[s.mode]);
        const b = s.brush;
        for (const v of [
            b.baseWidth,
            b.color[0],
            b.color[1],
            b.color[2],
            b.color[3],
            b.sprayConeHalfAngle,
            b.sprayRange,
            b.dripProbability,
            b.dripMaxLength,
        ]) {
            w.f32(v);
        }
        const line = s.centerline;
        w.u32(line.length);
        for (let i = 0; i < line.length; i++) {
            w.f32(line.points[i][0]);
            w.f32(line.points[i][1]);
            w.f32(line.points[i][2]);
            w.f32(line.timestamps[i]);
            w.f32(line.pressure[i]);
        }
        w.u32(s.drips.length);
        for (const d of s.drips) {
            w.f32(d.anchor[0]);
            w.f32(d.anchor[1]);
            w.f32(d.anchor[2]);
            w.f32(d.length);
            w.f32(d.width);
        }
    }
    return w.bytes();
}

function encodePlacement(p: PlacementTransform): Uint8Array {
    const w = new ByteWriter();
    for (const v of p.translation) w.f64(v);
    for (const v of p.rotation) w.f64(v);
    w.f64(p.scale);
    return w.bytes();
}

/** Canonical binary encoding; deterministic for equal artworks. */
export function encodeArtwork(a: Artwork): Uint8Array {
    const w = new ByteWriter();
    w.raw(new TextEncoder().encode(MAGIC));
    w.u16(FORMAT_VERSION);
    const sections: (Uint8Array | null)[] = [
        encodeHeader(a),
        a.canvas !== null ? encodeCanvas(a.canvas) : null,
        encodeStrokes(a.strokes),
        encodePlacement(a.placement),
    ];
    for (const section of sections) {
        if (section === null) {
            continue;
        }
        w.u32(section.length);
        w.raw(section);
    }
    return w.bytes();
}

// ---------------------------------------------------------------------------
// Binary decoding.

class ByteReader {
    pos: number;

    constructor(
        private data: Uint8Array,
        private view: DataView,
        private base: number,
        private end: number,
    ) {
        this.pos = base;
    }

    get remaining(): number {
        return this.end - this.pos;
    }

    take(n: number, what: string): number {
        if (n < 0 || this.pos + n > this.end) {
            throw new CorruptionError(`truncated while reading ${what}`, this.pos);
        }
        const at = this.pos;
        this.pos += n;
        return at;
    }

    rawBytes(n: number, what: string): Uint8Array {
        const at = this.take(n, what);
        return this.data.subarray(at, at + n);
    }

    u8(what: string): number {
        return this.view.getUint8(this.take(1, what));
    }

    u16(what: string): number {
        return this.view.getUint16(this.take(2, what), true);
    }

    u32(what: string): number {
        return this.view.getUint32(this.take(4, what), true);
    }

    u64(what: string): bigint {
        return this.view.getBigUint64(this.take(8, what), true);
    }

    f32(what: string): number {
        return this.view.getFloat32(this.take(4, what), true);
    }

    f64(what: string): number {
        return this.view.getFloat64(this.take(8, what), true);
    }

    string(what: string): string {
        const len = this.u16(`${what} length`);
        const bytes = this.rawBytes(len, what);
        return new TextDecoder("utf-8", { fatal: true }).decode(bytes);
    }

    sub(length: number, what: string): ByteReader {
        const at = this.take(length, what);
        return new ByteReader(this.data, this.view, at, at + length);
    }
}

interface Header {
    artworkId: string;
    author: string;
    title: string;
    createdAt: number;
    hasCanvas: boolean;
    strokeCount: number;
}

function decodeHeader(r: ByteReader): Header {
    const artworkId = uuidFromBytes(r.rawBytes(16, "artwork id"));
    const author = r.string("author");
    const title = r.string("title");
    const createdAt = r.f64("created_at");
    const hasCanvas = r.u8("canvas flag") !== 0;
    const strokeCount = r.u32("stroke count");
    if (r.remaining !== 0) {
        throw new CorruptionError("stray bytes after header fields", r.pos);
    }
    return { artworkId, author, title, createdAt, hasCanvas, strokeCount };
}

function decodeCanvas(r: ByteReader): CanvasPlane {
    const normal: Vec3 = [r.f64("normal"), r.f64("normal"), r.f64("normal")];
    const offset = r.f64("offset");
    const uAxis: Vec3 = [r.f64("u axis"), r.f64("u axis"), r.f64("u axis")];
    const vAxis: Vec3 = [r.f64("v axis"), r.f64("v axis"), r.f64("v axis")];
    const bounds: [number, number, number, number] = [
        r.f64("bounds"),
        r.f64("bounds"),
        r.f64("bounds"),
        r.f64("bounds"),
    ];
    const fitRms = r.f64("fit rms");
    if (r.remaining !== 0) {
        throw new CorruptionError("stray bytes after canvas fields", r.pos);
    }
    return { normal, offset, uAxis, vAxis, bounds, fitRms };
}

const TOOL_FROM_CODE: Tool[] = ["spray", "drip"];
const MODE_FROM_CODE: DrawMode[] = ["2d", "3d"];

function decodeStrokes(r: ByteReader, count: number): Stroke[] {
    const strokes: Stroke[] = [];
    for (let s = 0; s < count; s++) {
        const idBig = r.u64("stroke id");
        if (idBig > BigInt(Number.MAX_SAFE_INTEGER)) {
            throw new CorruptionError(`stroke id ${idBig} too large for this client`, r.pos);
        }
        const toolCode = r.u8("tool code");
        if (toolCode > 1) {
            throw new FormatError(`unknown tool code ${toolCode}`);
        }
        const modeCode = r.u8("mode code");
        if (modeCode > 1) {
            throw new FormatError(`unknown mode code ${modeCode}`);
        }
        const vals: number[] = [];
        for (let i = 0; i < 9; i++) {
            vals.push(r.f32("brush"));
        }
        const brush: BrushParams = {
            tool: TOOL_FROM_CODE[toolCode],
            baseWidth: vals[0],
            color: [vals[1], vals[2], vals[3], vals[4]],
            sprayConeHalfAngle: vals[5],
            sprayRange: vals[6],
            dripProbability: vals[7],
            dripMaxLength: vals[8],
        };
        const pointCount = r.u32("point count");
        if (pointCount === 0) {
            throw new FormatError("stroke centerline is empty");
        }
        if (pointCount * 20 > r.remaining) {
            throw new CorruptionError(`point count ${pointCount} exceeds section`, r.pos);
        }
        const points: Vec3[] = [];
        const timestamps: number[] = [];
        const pressure: number[] = [];
        for (let i = 0; i < pointCount; i++) {
            points.push([r.f32("point"), r.f32("point"), r.f32("point")]);
            timestamps.push(r.f32("timestamp"));
            pressure.push(r.f32("pressure"));
        }
        const dripCount = r.u32("drip count");
        if (dripCount * 20 > r.remaining) {
            throw new CorruptionError(`drip count ${dripCount} exceeds section`, r.pos);
        }
        const drips: DripSeed[] = [];
        for (let i = 0; i < dripCount; i++) {
            drips.push({
                anchor: [r.f32("drip anchor"), r.f32("drip anchor"), r.f32("drip anchor")],
                length: r.f32("drip length"),
                width: r.f32("drip width"),
            });
        }
        strokes.push({
            id: Number(idBig),
            centerline: new Centerline(points, timestamps, TOOL_FROM_CODE[toolCode], pressure),
            brush,
            mode: MODE_FROM_CODE[modeCode],
            drips,
        });
    }
    if (r.remaining !== 0) {
        throw new CorruptionError("stray bytes after stroke records", r.pos);
    }
    return strokes;
}

function decodePlacement(r: ByteReader): PlacementTransform {
    const translation: Vec3 = [r.f64("translation"), r.f64("translation"), r.f64("translation")];
    const rotation: Quat = [r.f64("rotation"), r.f64("rotation"), r.f64("rotation"), r.f64("rotation")];
    const scale = r.f64("scale");
    if (r.remaining !== 0) {
        throw new CorruptionError("stray bytes after placement fields", r.pos);
    }
    if (!quatIsUnit(rotation)) {
        throw new CorruptionError("placement rotation is not unit norm", r.pos);
    }
    if (!(scale > 0.0 && Number.isFinite(scale))) {
        throw new CorruptionError(`placement scale must be positive, got ${scale}`, r.pos);
    }
    return { translation, rotation, scale };
}

export function decodeArtwork(data: Uint8Array): Artwork {
    const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
    const r = new ByteReader(data, view, 0, data.length);
    const magic = r.rawBytes(4, "magic");
    const magicStr = String.fromCharCode(...magic);
    if (magicStr !== MAGIC) {
        throw new FormatError(`bad magic ${JSON.stringify(magicStr)}`);
    }
    const version = r.u16("format version");
    if (version !== FORMAT_VERSION) {
        throw new VersionError(`unsupported format version ${version}`);
    }

    const headerLen = r.u32("header section length");
    const header = decodeHeader(r.sub(headerLen, "header section"));
    let canvas: CanvasPlane | null = null;
    if (header.hasCanvas) {
        const canvasLen = r.u32("canvas section length");
        canvas = decodeCanvas(r.sub(canvasLen, "canvas section"));
    }
    const strokesLen = r.u32("strokes section length");
    const strokes = decodeStrokes(r.sub(strokesLen, "strokes section"), header.strokeCount);
    const placementLen = r.u32("placement section length");
    const placement = decodePlacement(r.sub(placementLen, "placement section"));
    if (r.remaining !== 0) {
        throw new CorruptionError(`${r.remaining} stray trailing bytes`, r.pos);
    }
    return makeArtwork({
        artworkId: header.artworkId,
        author: header.author,
        title: header.title,
        createdAt: header.createdAt,
        canvas,
        strokes,
        placement,
    });
}

// ---------------------------------------------------------------------------
// Pack and re-tessellation.

/** Replay the stream and freeze the result into a persistable artwork;
 * created_at defaults to the last sample time so packing is deterministic. */
export function packArtwork(
    samples: PoseSample[],
    settings: ReplaySettings,
    plane: CanvasPlane | null,
    artworkId: string,
    author: string,
    title: string,
    createdAt: number | null = null,
): Artwork {
    const result = replay(samples, settings, plane);
    if (createdAt === null) {
        createdAt = samples.length ? samples[samples.length - 1].t : 0.0;
    }
    const strokes = result.strokes.map((r, i) =>
        makeStroke(
            i + 1,
            r.centerline,
            brushForTool(settings, r.centerline.tool),
            settings.mode,
            r.dripSeeds,
        ),
    );
    return makeArtwork({
        artworkId,
        author,
        title,
        createdAt,
        canvas: settings.mode === "2d" ? plane : null,
        strokes,
    });
}

/** Re-tessellate a stored stroke, drips included; no randomness. */
export function strokeMesh(
    stroke: Stroke,
    canvas: CanvasPlane | null,
    tubeSides: number = config.DEFAULT_TUBE_SIDES,
): TriangleMesh {
    if (stroke.mode === "2d") {
        if (canvas === null) {
            throw new Error("2D stroke requires the artwork canvas");
        }
        const parts = [tessellateRibbon(stroke.centerline, stroke.brush, canvas.normal)];
        for (const seed of stroke.drips) {
            parts.push(tessellateRibbon(dripCenterlineForSeed(seed, canvas), stroke.brush, canvas.normal));
        }
        return mergeMeshes(parts);
    }
    return tessellateTube(stroke.centerline, stroke.brush, tubeSides);
}

/** Tessellation of every stored stroke in local (unplaced) coordinates. */
export function artworkMesh(artwork: Artwork, tubeSides: number = config.DEFAULT_TUBE_SIDES): TriangleMesh {
    return mergeMeshes(artwork.strokes.map((s) => strokeMesh(s, artwork.canvas, tubeSides)));
}

/** Tessellation with the placement transform applied. */
export function placedMesh(artwork: Artwork, tubeSides: number = config.DEFAULT_TUBE_SIDES): TriangleMesh {
    const local = artworkMesh(artwork, tubeSides);
    const p = artwork.placement;
    return transformMesh(local, quatToMatrix(p.rotation), p.translation, p.scale);
}
