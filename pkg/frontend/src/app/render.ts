// Minimal 2D-canvas renderer for triangle meshes: orthographic camera on
// the -z axis, painter-sorted triangles, flat shading from vertex normals.
// Good enough to see strokes, drips, and placement edits without pulling
// in a GPU stack.

import { TriangleMesh } from "../engine/tessellate.js";
import { Vec3 } from "../engine/vec.js";

export interface Viewport {
    /** Pixels per world meter. */
    ppm: number;
    /** World point mapped to the canvas centre. */
    center: [number, number];
    width: number;
    height: number;
}

export function defaultViewport(width: number, height: number): Viewport {
    return { ppm: 520, center: [0.25, 0.25], width, height };
}

export function worldToScreen(view: Viewport, p: Vec3): [number, number] {
    return [
        view.width / 2 + (p[0] - view.center[0]) * view.ppm,
        view.height / 2 - (p[1] - view.center[1]) * view.ppm,
    ];
}

export function screenToWorld(view: Viewport, sx: number, sy: number, depth: number): Vec3 {
    return [
        view.center[0] + (sx - view.width / 2) / view.ppm,
        view.center[1] - (sy - view.height / 2) / view.ppm,
        depth,
    ];
}

const LIGHT_DIR: Vec3 = [0.3, 0.5, 0.81];

interface PaintTri {
    depth: number;
    path: [number, number][];
    fill: string;
}

function shade(mesh: TriangleMesh, i0: number, i1: number, i2: number): string {
    let r = 0;
    let g = 0;
    let b = 0;
    let a = 0;
    let lit = 0;
    for (const i of [i0, i1, i2]) {
        const c = mesh.colors[i];
        r += c[0];
        g += c[1];
        b += c[2];
        a += c[3];
        const n = mesh.normals[i];
        lit += Math.abs(n[0] * LIGHT_DIR[0] + n[1] * LIGHT_DIR[1] + n[2] * LIGHT_DIR[2]);
    }
    const k = (0.45 + 0.55 * (lit / 3)) / 3;
    const to255 = (v: number) => Math.max(0, Math.min(255, Math.round(v * k * 255)));
    return `rgba(${to255(r)},${to255(g)},${to255(b)},${Math.max(0, Math.min(1, a / 3)).toFixed(3)})`;
}

export function renderMesh(ctx: CanvasRenderingContext2D, mesh: TriangleMesh, view: Viewport): void {
    const tris: PaintTri[] = [];
    for (let t = 0; t + 2 < mesh.indices.length; t += 3) {
        const i0 = mesh.indices[t];
        const i1 = mesh.indices[t + 1];
        const i2 = mesh.indices[t + 2];
        const v0 = mesh.vertices[i0];
        const v1 = mesh.vertices[i1];
        const v2 = mesh.vertices[i2];
        tris.push({
            depth: (v0[2] + v1[2] + v2[2]) / 3,
            path: [worldToScreen(view, v0), worldToScreen(view, v1), worldToScreen(view, v2)],
            fill: shade(mesh, i0, i1, i2),
        });
    }
    tris.sort((a, b) => b.depth - a.depth);
    for (const tri of tris) {
        ctx.beginPath();
        ctx.moveTo(tri.path[0][0], tri.path[0][1]);
        ctx.lineTo(tri.path[1][0], tri.path[1][1]);
        ctx.lineTo(tri.path[2][0], tri.path[2][1]);
        ctx.closePath();
        ctx.fillStyle = tri.fill;
        ctx.fill();
    }
}

export function renderPolyline(
    ctx: CanvasRenderingContext2D,
    view: Viewport,
    points: Vec3[],
    stroke: string,
    close = false,
): void {
    if (points.length === 0) {
        return;
    }
    ctx.beginPath();
    const [x0, y0] = worldToScreen(view, points[0]);
    ctx.moveTo(x0, y0);
    for (let i = 1; i < points.length; i++) {
        const [x, y] = worldToScreen(view, points[i]);
        ctx.lineTo(x, y);
    }
    if (close) {
        ctx.closePath();
    }
    ctx.strokeStyle = stroke;
    ctx.lineWidth = 1.5;
    ctx.stroke();
}

export function renderMarkers(
    ctx: CanvasRenderingContext2D,
    view: Viewport,
    points: Vec3[],
    fill: string,
): void {
    ctx.fillStyle = fill;
    for (const p of points) {
        const [x, y] = worldToScreen(view, p);
        ctx.beginPath();
        ctx.arc(x, y, 4, 0, Math.PI * 2);
        ctx.fill();
    }
}
