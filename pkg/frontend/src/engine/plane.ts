// Wall-canvas registration: least-squares plane fit over scanned points,
// plus the 2D drawing constraint that projects strokes onto the plane with
// a small outward lift. Mirrors the server's fit semantics (centroid plane,
// least-variance normal, deterministic sign, horizontal-ish u axis, padded
// bounds); the normal comes from a Jacobi eigensolver on the 3x3 scatter
// matrix rather than an SVD, which agrees to roundoff.

import * as config from "./config.js";
import { Centerline } from "./pipeline.js";
import { Vec3, cross, dot, norm, normalize } from "./vec.js";

const AXIS_TOL = 1e-6;
const SIGN_TOL = 1e-9;

export type DrawMode = "2d" | "3d";

export class DegenerateScanError extends Error {
    override name = "DegenerateScanError";
}

export class NoisyScanError extends Error {
    override name = "NoisyScanError";
}

export interface CanvasPlane {
    normal: Vec3;
    offset: number;
    uAxis: Vec3;
    vAxis: Vec3;
    bounds: [number, number, number, number];
    fitRms: number;
}

export function planeOrigin(plane: CanvasPlane): Vec3 {
    return [plane.offset * plane.normal[0], plane.offset * plane.normal[1], plane.offset * plane.normal[2]];
}

export function signedDistance(plane: CanvasPlane, p: Vec3): number {
    return dot(plane.normal, p) - plane.offset;
}

/** Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi
 * rotations; returns eigenvalues (unsorted) and matching column
 * eigenvectors. Converges in a handful of sweeps for scatter matrices. */
function jacobiEigen3(m: number[][]): { values: number[]; vectors: number[][] } {
    const a = m.map((row) => row.slice());
    const v = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    for (let sweep = 0; sweep < 50; sweep++) {
        let off = 0.0;
        for (let p = 0; p < 3; p++) {
            for (let q = p + 1; q < 3; q++) {
                off += a[p][q] * a[p][q];
            }
        }
        if (off === 0.0) {
            break;
        }
        for (let p = 0; p < 3; p++) {
            for (let q = p + 1; q < 3; q++) {
                if (a[p][q] === 0.0) {
                    continue;
                }
                const theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const t = Math.sign(theta || 1) / (Math.abs(theta) + Math.sqrt(theta * theta + 1.0));
                const c = 1.0 / Math.sqrt(t * t + 1.0);
                const s = t * c;
                const apq = a[p][q];
                const app = a[p][p];
                const aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for (let k = 0; k < 3; k++) {
                    if (k !== p && k !== q) {
                        const akp = a[k][p];
                        const akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[p][k] = a[k][p];
                        a[k][q] = s * akp + c * akq;
                        a[q][k] = a[k][q];
                    }
                    const vkp = v[k][p];
                    const vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    return { values: [a[0][0], a[1][1], a[2][2]], vectors: v };
}

function orientNormal(normal: Vec3, viewDir: Vec3 | null): Vec3 {
    if (viewDir !== null) {
        const d = dot(normal, viewDir);
        if (d > 0.0) {
            return [-normal[0], -normal[1], -normal[2]];
        }
        if (d < 0.0) {
            return normal;
        }
    }
    for (const i of [2, 0, 1]) {
        if (normal[i] > SIGN_TOL) {
            return normal;
        }
        if (normal[i] < -SIGN_TOL) {
            return [-normal[0], -normal[1], -normal[2]];
        }
    }
    return normal;
}

/** Least-squares plane through scanned points: centroid anchor, normal
 * along least variance, padded (u, v) sample bounds. Throws
 * DegenerateScanError for < 3 points or collinear scans, NoisyScanError
 * when the residual RMS exceeds maxRms. */
export function fitPlane(
    samples: Vec3[],
    maxRms: number = config.DEFAULT_SCAN_MAX_RMS,
    viewDir: Vec3 | null = null,
): CanvasPlane {
    const pts = samples;
    for (const p of pts) {
        if (!p.every(Number.isFinite)) {
            throw new Error("scan samples must be finite");
        }
    }
    if (pts.length < 3) {
        throw new DegenerateScanError(`need at least 3 samples, got ${pts.length}`);
    }

    const n = pts.length;
    const centroid: Vec3 = [0.0, 0.0, 0.0];
    for (const p of pts) {
        centroid[0] += p[0];
        centroid[1] += p[1];
        centroid[2] += p[2];
    }
    centroid[0] /= n;
    centroid[1] /= n;
    centroid[2] /= n;

    const scatter = [
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
    ];
    for (const p of pts) {
        const d: Vec3 = [p[0] - centroid[0], p[1] - centroid[1], p[2] - centroid[2]];
        for (let i = 0; i < 3; i++) {
            for (let j = 0; j < 3; j++) {
                scatter[i][j] += d[i] * d[j];
            }
        }
    }

    const { values, vectors } = jacobiEigen3(scatter);
    const order = [0, 1, 2].sort((a, b) => values[a] - values[b]);
    const [loIdx, midIdx, hiIdx] = order;
    // Eigenvalues of the scatter matrix are squared singular values, so the
    // server's collinearity test sv1^2 <= sv0^2 * 1e-12 maps directly.
    if (values[midIdx] <= values[hiIdx] * 1e-12) {
        throw new DegenerateScanError("scan samples are collinear");
    }

    const rawNormal: Vec3 = [vectors[0][loIdx], vectors[1][loIdx], vectors[2][loIdx]];
    const normal = orientNormal(normalize(rawNormal), viewDir);
    const offset = dot(normal, centroid);
    let sq = 0.0;
    for (const p of pts) {
        const r =
            (p[0] - centroid[0]) * normal[0] +
            (p[1] - centroid[1]) * normal[1] +
            (p[2] - centroid[2]) * normal[2];
        sq += r * r;
    }
    const fitRms = Math.sqrt(sq / n);
    if (fitRms > maxRms) {
        throw new NoisyScanError(`fit rms ${fitRms.toFixed(4)} m exceeds limit ${maxRms} m`);
    }

    let uCand = cross(config.WORLD_UP, normal);
    if (norm(uCand) <= 1e-3) {
        uCand = cross([1.0, 0.0, 0.0], normal);
    }
    const uAxis = normalize(uCand);
    const vAxis = cross(normal, uAxis);

    let uMin = Infinity;
    let uMax = -Infinity;
    let vMin = Infinity;
    let vMax = -Infinity;
    for (const p of pts) {
        const rel: Vec3 = [
            p[0] - offset * normal[0],
            p[1] - offset * normal[1],
            p[2] - offset * normal[2],
        ];
        const u = dot(rel, uAxis);
        const w = dot(rel, vAxis);
        uMin = Math.min(uMin, u);
        uMax = Math.max(uMax, u);
        vMin = Math.min(vMin, w);
        vMax = Math.max(vMax, w);
    }
    const pad = config.CANVAS_BOUNDS_PADDING;
    const bounds: [number, number, number, number] = [uMin - pad, uMax + pad, vMin - pad, vMax + pad];

    if (Math.abs(norm(normal) - 1.0) > AXIS_TOL) {
        throw new Error("plane normal must be unit length");
    }
    return { normal, offset, uAxis, vAxis, bounds, fitRms };
}

export interface ProjectedPoint {
    uv: [number, number];
    world: Vec3;
    distance: number;
}

export function projectToCanvas(point: Vec3, plane: CanvasPlane): ProjectedPoint {
    const distance = dot(plane.normal, point) - plane.offset;
    const world: Vec3 = [
        point[0] - distance * plane.normal[0],
        point[1] - distance * plane.normal[1],
        point[2] - distance * plane.normal[2],
    ];
    const origin = planeOrigin(plane);
    const rel: Vec3 = [world[0] - origin[0], world[1] - origin[1], world[2] - origin[2]];
    return { uv: [dot(rel, plane.uAxis), dot(rel, plane.vAxis)], world, distance };
}

/** 2D mode projects every point onto the canvas and lifts it outward by
 * CANVAS_LIFT; 3D mode passes the line through unchanged. */
export function constrainStroke(
    line: Centerline,
    plane: CanvasPlane | null,
    mode: DrawMode,
): Centerline {
    if (mode === "3d") {
        return line;
    }
    if (plane === null) {
        throw new Error("2D mode requires a registered canvas plane");
    }
    const out: Vec3[] = line.points.map((p) => {
        const dist = dot(p, plane.normal) - plane.offset;
        return [
            p[0] - dist * plane.normal[0] + config.CANVAS_LIFT * plane.normal[0],
            p[1] - dist * plane.normal[1] + config.CANVAS_LIFT * plane.normal[1],
            p[2] - dist * plane.normal[2] + config.CANVAS_LIFT * plane.normal[2],
        ];
    });
    return line.withPoints(out);
}

// ---------------------------------------------------------------------------
// Scan-sample fixture format: JSON Lines of [x, y, z] arrays, meters.

export function parseScanSamples(text: string): Vec3[] {
    const pts: Vec3[] = [];
    const lines = text.split("\n");
    for (const raw of lines) {
        if (!raw.trim()) {
            continue;
        }
        const arr = JSON.parse(raw);
        if (!Array.isArray(arr) || arr.length !== 3) {
            throw new Error("expected an [x, y, z] array");
        }
        pts.push([Number(arr[0]), Number(arr[1]), Number(arr[2])]);
    }
    return pts;
}

export function formatScanSamples(points: Vec3[]): string {
    return points.map((p) => JSON.stringify(p)).join("\n") + (points.length ? "\n" : "");
}
