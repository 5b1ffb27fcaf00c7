// End-to-end replay: pose stream to strokes, meshes, and the stats the UI
// displays. Per stroke: resample, smooth, pressure, constrain, tessellate,
// and for the drip mop on a canvas, drip simulation with the per-stroke
// seed splitmix64((globalSeed + i) mod 2**64).

import { BrushParams, makeBrush, sprayPressure } from "./brush.js";
import * as config from "./config.js";
import { dripSimulate, DripSeed } from "./drips.js";
import { Centerline, PoseSample, resample, segmentStrokes, smoothLine, Tool } from "./pipeline.js";
import { CanvasPlane, constrainStroke, DrawMode } from "./plane.js";
import { deriveStrokeSeed } from "./prng.js";
import {
    mergeMeshes,
    tessellateRibbon,
    tessellateTube,
    triangleCount,
    TriangleMesh,
    vertexCount,
} from "./tessellate.js";
import { Vec3 } from "./vec.js";

export interface ReplaySettings {
    mode: DrawMode;
    brushes: { spray: BrushParams; drip: BrushParams };
    nibOffset: Vec3;
    minSpacing: number;
    smoothWindow: number;
    tubeSides: number;
    seed: bigint;
}

export function defaultSettings(mode: DrawMode = "3d"): ReplaySettings {
    return {
        mode,
        brushes: { spray: makeBrush("spray"), drip: makeBrush("drip") },
        nibOffset: config.DEFAULT_NIB_OFFSET,
        minSpacing: config.DEFAULT_MIN_SPACING,
        smoothWindow: config.DEFAULT_SMOOTH_WINDOW,
        tubeSides: config.DEFAULT_TUBE_SIDES,
        seed: 0n,
    };
}

export interface StrokeResult {
    centerline: Centerline;
    mesh: TriangleMesh;
    dripSeeds: DripSeed[];
}

export interface ReplayStats {
    strokes: number;
    vertices: number;
    triangles: number;
    arc_length: number;
}

export interface ReplayResult {
    strokes: StrokeResult[];
    mesh: TriangleMesh;
}

export function replayStats(result: ReplayResult): ReplayStats {
    let arc = 0.0;
    for (const s of result.strokes) {
        arc += s.centerline.arcLength();
    }
    return {
        strokes: result.strokes.length,
        vertices: vertexCount(result.mesh),
        triangles: triangleCount(result.mesh),
        arc_length: arc,
    };
}

/** Resample, smooth, derive pressure, then apply the mode constraint. */
export function prepareCenterline(
    line: Centerline,
    settings: ReplaySettings,
    plane: CanvasPlane | null,
): Centerline {
    let out = resample(line, settings.minSpacing);
    out = smoothLine(out, settings.smoothWindow);
    if (line.tool === "spray") {
        // pressure reflects true nib-to-wall distance, so it is computed
        // before the constraint collapses that distance
        out = sprayPressure(out, plane, settings.brushes.spray.sprayRange);
    }
    return constrainStroke(out, plane, settings.mode);
}

export function processStroke(
    line: Centerline,
    settings: ReplaySettings,
    plane: CanvasPlane | null,
    strokeIndex: number,
): StrokeResult {
    const brush = line.tool === "spray" ? settings.brushes.spray : settings.brushes.drip;
    const final = prepareCenterline(line, settings, plane);
    let dripSeeds: DripSeed[] = [];
    const parts: TriangleMesh[] = [];
    if (settings.mode === "2d") {
        const canvas = plane as CanvasPlane;
        parts.push(tessellateRibbon(final, brush, canvas.normal));
        if (line.tool === "drip") {
            const onPlane = final.withPoints(
                final.points.map(
                    (p) =>
                        [
                            p[0] - config.CANVAS_LIFT * canvas.normal[0],
                            p[1] - config.CANVAS_LIFT * canvas.normal[1],
                            p[2] - config.CANVAS_LIFT * canvas.normal[2],
                        ] as Vec3,
                ),
            );
            const { seeds, lines } = dripSimulate(
                onPlane,
                canvas,
                brush,
                deriveStrokeSeed(settings.seed, strokeIndex),
            );
            dripSeeds = seeds;
            for (const d of lines) {
                parts.push(tessellateRibbon(d, brush, canvas.normal));
            }
        }
    } else {
        parts.push(tessellateTube(final, brush, settings.tubeSides));
    }
    return { centerline: final, mesh: mergeMeshes(parts), dripSeeds };
}

export function replay(
    samples: PoseSample[],
    settings: ReplaySettings,
    plane: CanvasPlane | null = null,
): ReplayResult {
    const lines = segmentStrokes(samples, settings.nibOffset);
    const strokes = lines.map((line, i) => processStroke(line, settings, plane, i));
    return { strokes, mesh: mergeMeshes(strokes.map((s) => s.mesh)) };
}

export function brushForTool(settings: ReplaySettings, tool: Tool): BrushParams {
    return tool === "spray" ? settings.brushes.spray : settings.brushes.drip;
}
