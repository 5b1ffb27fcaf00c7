// Pose stream to clean stroke centerlines: nib transform, segmentation
// into held-button runs, arc-length resampling, and moving-average
// smoothing. Mirrors the server pipeline step for step; in particular the
// resampled point count comes out of the identical floor(arc / spacing)
// decision on identically computed doubles, which is what the
// cross-component parity tests pin down.

import * as config from "./config.js";
import { Quat, Vec3, add, quatIsUnit, quatRotate } from "./vec.js";

// Arc positions closer than this count as coincident when deciding whether
// the final endpoint needs its own resampled point, meters.
const COINCIDENT_TOL = 1e-9;

export type Tool = "spray" | "drip";

export interface PoseSample {
    t: number;
    p: Vec3;
    q: Quat;
    pressed: boolean;
    tool: Tool;
}

export class PoseLogError extends Error {
    constructor(message: string, readonly line: number | null = null) {
        super(line === null ? message : `line ${line}: ${message}`);
        this.name = "PoseLogError";
    }
}

export class Centerline {
    readonly points: Vec3[];
    readonly timestamps: number[];
    readonly pressure: number[];
    readonly tool: Tool;

    constructor(points: Vec3[], timestamps: number[], tool: Tool, pressure?: number[]) {
        if (points.length === 0) {
            throw new Error("a centerline needs at least one point");
        }
        if (pressure === undefined) {
            pressure = new Array(timestamps.length).fill(1.0);
        }
        if (points.length !== timestamps.length || points.length !== pressure.length) {
            throw new Error(
                `mismatched lengths: ${points.length} points, ` +
                `${timestamps.length} timestamps, ${pressure.length} pressure values`,
            );
        }
        this.points = points;
        this.timestamps = timestamps;
        this.pressure = pressure;
        this.tool = tool;
    }

    get length(): number {
        return this.points.length;
    }

    withPoints(points: Vec3[]): Centerline {
        return new Centerline(points, this.timestamps, this.tool, this.pressure);
    }

    withPressure(pressure: number[]): Centerline {
        return new Centerline(this.points, this.timestamps, this.tool, pressure);
    }

    arcLength(): number {
        if (this.length < 2) {
            return 0.0;
        }
        let total = 0.0;
        for (let i = 1; i < this.points.length; i++) {
            total += segNorm(this.points[i - 1], this.points[i]);
        }
        return total;
    }
}

function segNorm(a: Vec3, b: Vec3): number {
    const dx = b[0] - a[0];
    const dy = b[1] - a[1];
    const dz = b[2] - a[2];
    return Math.sqrt(dx * dx + dy * dy + dz * dz);
}

/** World position of the virtual nib: pose translation plus the rotated
 * device-local offset. */
export function nibPosition(pose: PoseSample, offset: Vec3 = config.DEFAULT_NIB_OFFSET): Vec3 {
    if (!quatIsUnit(pose.q)) {
        throw new Error("pose orientation is not unit norm");
    }
    return add(pose.p, quatRotate(pose.q, offset));
}

/** Split a pose stream into one raw centerline per held-button run; a tool
 * switch mid-press flushes the run and the switching sample starts the next
 * stroke. */
export function segmentStrokes(
    stream: PoseSample[],
    offset: Vec3 = config.DEFAULT_NIB_OFFSET,
): Centerline[] {
    for (let i = 1; i < stream.length; i++) {
        if (stream[i].t <= stream[i - 1].t) {
            throw new Error(
                `timestamps must be strictly increasing (${stream[i - 1].t} -> ${stream[i].t})`,
            );
        }
    }
    const lines: Centerline[] = [];
    let runPts: Vec3[] = [];
    let runTs: number[] = [];
    let runTool: Tool | null = null;

    const flush = () => {
        if (runPts.length) {
            lines.push(new Centerline(runPts, runTs, runTool as Tool));
        }
        runPts = [];
        runTs = [];
        runTool = null;
    };

    for (const sample of stream) {
        if (!sample.pressed) {
            flush();
            continue;
        }
        if (runTool !== null && sample.tool !== runTool) {
            flush();
        }
        if (runTool === null) {
            runTool = sample.tool;
        }
        runPts.push(nibPosition(sample, offset));
        runTs.push(sample.t);
    }
    flush();
    return lines;
}

/** Linear interpolation with the reference engine's exact-knot shortcut:
 * xp strictly increasing, x clamped to the end values. */
function interp1(x: number, xp: number[], fp: number[]): number {
    const n = xp.length;
    if (x <= xp[0]) {
        return fp[0];
    }
    if (x >= xp[n - 1]) {
        return fp[n - 1];
    }
    let lo = 0;
    let hi = n - 1;
    while (hi - lo > 1) {
        const mid = (lo + hi) >> 1;
        if (xp[mid] <= x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (xp[lo] === x) {
        return fp[lo];
    }
    const slope = (fp[lo + 1] - fp[lo]) / (xp[lo + 1] - xp[lo]);
    return slope * (x - xp[lo]) + fp[lo];
}

/** Resample a centerline at uniform arc-length spacing; first and last
 * input points are kept exactly, and the endpoint is appended when the last
 * uniform sample does not already land on it. */
export function resample(line: Centerline, minSpacing: number): Centerline {
    if (!(minSpacing > 0.0) || !Number.isFinite(minSpacing)) {
        throw new Error(`min_spacing must be positive, got ${minSpacing}`);
    }

    // Exact duplicate neighbors would break interpolation; drop them.
    let pts = line.points;
    let ts = line.timestamps;
    let pr = line.pressure;
    if (pts.length > 1) {
        const keptPts: Vec3[] = [pts[0]];
        const keptTs: number[] = [ts[0]];
        const keptPr: number[] = [pr[0]];
        for (let i = 1; i < pts.length; i++) {
            if (segNorm(pts[i - 1], pts[i]) > 0.0) {
                keptPts.push(pts[i]);
                keptTs.push(ts[i]);
                keptPr.push(pr[i]);
            }
        }
        pts = keptPts;
        ts = keptTs;
        pr = keptPr;
    }

    if (pts.length < 2) {
        return new Centerline([pts[0]], [ts[0]], line.tool, [pr[0]]);
    }

    const cum: number[] = [0.0];
    let acc = 0.0;
    for (let i = 1; i < pts.length; i++) {
        acc += segNorm(pts[i - 1], pts[i]);
        cum.push(acc);
    }
    const arc = cum[cum.length - 1];
    if (arc <= COINCIDENT_TOL) {
        return new Centerline([pts[0]], [ts[0]], line.tool, [pr[0]]);
    }

    const nSteps = Math.floor(arc / minSpacing + 1e-9);
    const xs = pts.map((p) => p[0]);
    const ys = pts.map((p) => p[1]);
    const zs = pts.map((p) => p[2]);
    const outPts: Vec3[] = [];
    const outTs: number[] = [];
    const outPr: number[] = [];
    let lastTarget = 0.0;
    for (let k = 0; k <= nSteps; k++) {
        const target = minSpacing * k;
        lastTarget = target;
        outPts.push([interp1(target, cum, xs), interp1(target, cum, ys), interp1(target, cum, zs)]);
        outTs.push(interp1(target, cum, ts));
        outPr.push(interp1(target, cum, pr));
    }

    outPts[0] = pts[0];
    if (arc - lastTarget > COINCIDENT_TOL) {
        outPts.push(pts[pts.length - 1]);
        outTs.push(ts[ts.length - 1]);
        outPr.push(pr[pr.length - 1]);
    } else {
        outPts[outPts.length - 1] = pts[pts.length - 1];
        outTs[outTs.length - 1] = ts[ts.length - 1];
        outPr[outPr.length - 1] = pr[pr.length - 1];
    }
    return new Centerline(outPts, outTs, line.tool, outPr);
}

/** Centered moving average with a symmetrically clamped window, identity on
 * the endpoints. Sums run left to right like the reference engine's small
 * reductions. */
export function smoothLine(line: Centerline, window: number): Centerline {
    if (window < 1 || window % 2 === 0) {
        throw new Error(`window must be a positive odd integer, got ${window}`);
    }
    const n = line.length;
    if (window === 1 || n <= 2) {
        return line;
    }
    const half = (window / 2) | 0;
    const pts = line.points;
    const out: Vec3[] = pts.map((p) => [p[0], p[1], p[2]]);
    for (let i = 1; i < n - 1; i++) {
        const reach = Math.min(half, i, n - 1 - i);
        const count = 2 * reach + 1;
        let sx = 0.0;
        let sy = 0.0;
        let sz = 0.0;
        for (let j = i - reach; j <= i + reach; j++) {
            sx += pts[j][0];
            sy += pts[j][1];
            sz += pts[j][2];
        }
        out[i] = [sx / count, sy / count, sz / count];
    }
    return line.withPoints(out);
}

// ---------------------------------------------------------------------------
// Pose-log wire format: JSON Lines with fields t, p, q, pressed, tool.

export function parsePoseLog(text: string): PoseSample[] {
    const samples: PoseSample[] = [];
    let lastT: number | null = null;
    const lines = text.split("\n");
    for (let i = 0; i < lines.length; i++) {
        const raw = lines[i];
        if (!raw.trim()) {
            continue;
        }
        const lineno = i + 1;
        let obj: unknown;
        try {
            obj = JSON.parse(raw);
        } catch (exc) {
            throw new PoseLogError(`invalid JSON: ${(exc as Error).message}`, lineno);
        }
        if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
            throw new PoseLogError("expected a JSON object", lineno);
        }
        const rec = obj as Record<string, unknown>;
        const t = Number(rec.t);
        const p = rec.p as number[];
        const q = rec.q as number[];
        if (!Array.isArray(p) || p.length !== 3 || !Array.isArray(q) || q.length !== 4) {
            throw new PoseLogError("p must have 3 elements and q 4", lineno);
        }
        const tool = rec.tool;
        if (tool !== "spray" && tool !== "drip") {
            throw new PoseLogError(`bad tool ${JSON.stringify(tool)}`, lineno);
        }
        if (!Number.isFinite(t) || !p.every(Number.isFinite) || !q.every(Number.isFinite)) {
            throw new PoseLogError("non-finite pose value", lineno);
        }
        if (lastT !== null && t <= lastT) {
            throw new PoseLogError(`timestamp ${t} does not increase past ${lastT}`, lineno);
        }
        lastT = t;
        samples.push({
            t,
            p: [p[0], p[1], p[2]],
            q: [q[0], q[1], q[2], q[3]],
            pressed: Boolean(rec.pressed),
            tool,
        });
    }
    return samples;
}

/** Serialize samples to the JSONL wire form (LF endings). JSON.stringify
 * emits shortest round-trip decimals, so the server parses back the exact
 * same doubles. */
export function formatPoseLog(samples: PoseSample[]): string {
    const out = samples.map((s) =>
        JSON.stringify({ t: s.t, p: s.p, q: s.q, pressed: s.pressed, tool: s.tool }),
    );
    return out.length ? out.join("\n") + "\n" : "";
}
