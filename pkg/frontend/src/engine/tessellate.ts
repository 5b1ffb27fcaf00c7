// Centerlines to triangle meshes: flat ribbons for wall strokes, parallel
// transport tubes for free-space strokes. Count contracts match the server
// exactly: ribbons emit 2N vertices / 2(N-1) triangles, tubes N*sides
// vertices / 2(N-1)*sides triangles, after identical duplicate-point
// dropping.

import { BrushParams } from "./brush.js";
import { Centerline } from "./pipeline.js";
import { Vec3, cross, dot, matApply, normalize, perpendicular } from "./vec.js";

export interface TriangleMesh {
    vertices: Vec3[];
    normals: Vec3[];
    colors: [number, number, number, number][];
    indices: number[];
}

export function emptyMesh(): TriangleMesh {
    return { vertices: [], normals: [], colors: [], indices: [] };
}

export function vertexCount(mesh: TriangleMesh): number {
    return mesh.vertices.length;
}

export function triangleCount(mesh: TriangleMesh): number {
    return (mesh.indices.length / 3) | 0;
}

function segLen(a: Vec3, b: Vec3): number {
    const dx = b[0] - a[0];
    const dy = b[1] - a[1];
    const dz = b[2] - a[2];
    return Math.sqrt(dx * dx + dy * dy + dz * dz);
}

/** Drop exactly coincident consecutive points (original-neighbor test, the
 * same mask the server builds). */
function dedupe(points: Vec3[], pressure: number[]): { pts: Vec3[]; pr: number[] } {
    if (points.length < 2) {
        return { pts: points, pr: pressure };
    }
    const pts: Vec3[] = [points[0]];
    const pr: number[] = [pressure[0]];
    for (let i = 1; i < points.length; i++) {
        if (segLen(points[i - 1], points[i]) > 0.0) {
            pts.push(points[i]);
            pr.push(pressure[i]);
        }
    }
    return { pts, pr };
}

/** Per-point unit tangents: central differences inside, one-sided at the
 * ends, forward-difference fallback on exact back-tracks. */
function tangents(points: Vec3[]): Vec3[] {
    const n = points.length;
    const t: Vec3[] = new Array(n);
    t[0] = [points[1][0] - points[0][0], points[1][1] - points[0][1], points[1][2] - points[0][2]];
    t[n - 1] = [
        points[n - 1][0] - points[n - 2][0],
        points[n - 1][1] - points[n - 2][1],
        points[n - 1][2] - points[n - 2][2],
    ];
    for (let i = 1; i < n - 1; i++) {
        t[i] = [
            points[i + 1][0] - points[i - 1][0],
            points[i + 1][1] - points[i - 1][1],
            points[i + 1][2] - points[i - 1][2],
        ];
    }
    for (let i = 0; i < n; i++) {
        let len = Math.sqrt(t[i][0] * t[i][0] + t[i][1] * t[i][1] + t[i][2] * t[i][2]);
        if (len === 0.0) {
            const fwd: Vec3 = [
                points[i + 1][0] - points[i][0],
                points[i + 1][1] - points[i][1],
                points[i + 1][2] - points[i][2],
            ];
            t[i] = fwd;
            len = Math.sqrt(fwd[0] * fwd[0] + fwd[1] * fwd[1] + fwd[2] * fwd[2]);
        }
        t[i] = [t[i][0] / len, t[i][1] / len, t[i][2] / len];
    }
    return t;
}

/** Flat ribbon along a centerline facing facingNormal: one vertex pair per
 * point offset by half the local width along tangent x normal. */
export function tessellateRibbon(
    line: Centerline,
    brush: BrushParams,
    facingNormal: Vec3,
): TriangleMesh {
    const normal = normalize(facingNormal);
    const { pts, pr } = dedupe(line.points, line.pressure);
    const n = pts.length;
    if (n < 2) {
        return emptyMesh();
    }

    const tans = tangents(pts);
    const sides: Vec3[] = tans.map((t) => cross(t, normal));
    for (let i = 0; i < n; i++) {
        const len = Math.sqrt(
            sides[i][0] * sides[i][0] + sides[i][1] * sides[i][1] + sides[i][2] * sides[i][2],
        );
        if (len < 1e-9) {
            // Tangent parallel to the facing direction; any perpendicular works.
            sides[i] = perpendicular(tans[i]);
        } else {
            sides[i] = [sides[i][0] / len, sides[i][1] / len, sides[i][2] / len];
        }
    }

    const vertices: Vec3[] = [];
    const normals: Vec3[] = [];
    const colors: [number, number, number, number][] = [];
    for (let i = 0; i < n; i++) {
        const halfW = 0.5 * brush.baseWidth * pr[i];
        vertices.push([
            pts[i][0] + sides[i][0] * halfW,
            pts[i][1] + sides[i][1] * halfW,
            pts[i][2] + sides[i][2] * halfW,
        ]);
        vertices.push([
            pts[i][0] - sides[i][0] * halfW,
            pts[i][1] - sides[i][1] * halfW,
            pts[i][2] - sides[i][2] * halfW,
        ]);
        normals.push([normal[0], normal[1], normal[2]], [normal[0], normal[1], normal[2]]);
        colors.push([...brush.color], [...brush.color]);
    }

    const indices: number[] = [];
    for (let i = 0; i < n - 1; i++) {
        const base = 2 * i;
        indices.push(base, base + 1, base + 2, base + 1, base + 3, base + 2);
    }
    return { vertices, normals, colors, indices };
}

/** Sweep a regular polygon along the centerline with parallel-transport
 * frames; no end caps. */
export function tessellateTube(line: Centerline, brush: BrushParams, sides: number): TriangleMesh {
    if (sides < 3) {
        throw new Error(`a tube needs at least 3 sides, got ${sides}`);
    }
    const { pts, pr } = dedupe(line.points, line.pressure);
    const n = pts.length;
    if (n < 2) {
        return emptyMesh();
    }

    const tans = tangents(pts);
    const framesN: Vec3[] = new Array(n);
    const framesB: Vec3[] = new Array(n);
    framesN[0] = perpendicular(tans[0]);
    framesB[0] = cross(tans[0], framesN[0]);
    for (let i = 1; i < n; i++) {
        const prevT = tans[i - 1];
        const curT = tans[i];
        const axis = cross(prevT, curT);
        const s = Math.sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
        const c = dot(prevT, curT);
        let rotated: Vec3;
        if (s < 1e-12) {
            rotated = c > 0.0 ? framesN[i - 1] : [-framesN[i - 1][0], -framesN[i - 1][1], -framesN[i - 1][2]];
        } else {
            const k: Vec3 = [axis[0] / s, axis[1] / s, axis[2] / s];
            const v = framesN[i - 1];
            const kxv = cross(k, v);
            const kv = dot(k, v) * (1.0 - c);
            rotated = [
                v[0] * c + kxv[0] * s + k[0] * kv,
                v[1] * c + kxv[1] * s + k[1] * kv,
                v[2] * c + kxv[2] * s + k[2] * kv,
            ];
        }
        // Re-orthogonalize against the new tangent to stop drift.
        const along = dot(rotated, curT);
        rotated = [rotated[0] - along * curT[0], rotated[1] - along * curT[1], rotated[2] - along * curT[2]];
        framesN[i] = normalize(rotated);
        framesB[i] = cross(curT, framesN[i]);
    }

    const vertices: Vec3[] = [];
    const normals: Vec3[] = [];
    const colors: [number, number, number, number][] = [];
    for (let i = 0; i < n; i++) {
        const radius = 0.5 * brush.baseWidth * pr[i];
        for (let j = 0; j < sides; j++) {
            const theta = (2.0 * Math.PI * j) / sides;
            const ct = Math.cos(theta);
            const st = Math.sin(theta);
            const dir: Vec3 = [
                ct * framesN[i][0] + st * framesB[i][0],
                ct * framesN[i][1] + st * framesB[i][1],
                ct * framesN[i][2] + st * framesB[i][2],
            ];
            vertices.push([
                pts[i][0] + radius * dir[0],
                pts[i][1] + radius * dir[1],
                pts[i][2] + radius * dir[2],
            ]);
            normals.push(dir);
            colors.push([...brush.color]);
        }
    }

    const indices: number[] = [];
    for (let i = 0; i < n - 1; i++) {
        for (let j = 0; j < sides; j++) {
            const nj = (j + 1) % sides;
            const a = i * sides + j;
            const b = i * sides + nj;
            const c2 = (i + 1) * sides + j;
            const d = (i + 1) * sides + nj;
            indices.push(a, c2, b, b, c2, d);
        }
    }
    return { vertices, normals, colors, indices };
}

/** Concatenate meshes, rebasing indices. */
export function mergeMeshes(meshes: TriangleMesh[]): TriangleMesh {
    const out = emptyMesh();
    for (const m of meshes) {
        const base = out.vertices.length;
        out.vertices.push(...m.vertices);
        out.normals.push(...m.normals);
        out.colors.push(...m.colors);
        for (const idx of m.indices) {
            out.indices.push(idx + base);
        }
    }
    return out;
}

/** Scale, rotate, then translate vertices; normals rotate only. */
export function transformMesh(
    mesh: TriangleMesh,
    rotation: number[][] | null = null,
    translation: Vec3 | null = null,
    scaleF: number = 1.0,
): TriangleMesh {
    if (!(scaleF > 0.0 && Number.isFinite(scaleF))) {
        throw new Error(`scale must be positive and finite, got ${scaleF}`);
    }
    const rot = rotation;
    const tr = translation ?? ([0.0, 0.0, 0.0] as Vec3);
    const vertices = mesh.vertices.map((v) => {
        let p: Vec3 = [v[0] * scaleF, v[1] * scaleF, v[2] * scaleF];
        if (rot !== null) {
            p = matApply(rot, p);
        }
        return [p[0] + tr[0], p[1] + tr[1], p[2] + tr[2]] as Vec3;
    });
    const normals = rot === null ? mesh.normals : mesh.normals.map((nv) => matApply(rot, nv));
    return { vertices, normals, colors: mesh.colors, indices: mesh.indices };
}
