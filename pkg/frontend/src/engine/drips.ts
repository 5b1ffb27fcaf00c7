// Seeded gravity drips along an on-plane drip-mop centerline. The draw
// order is pinned: one float per candidate (every DRIP_SEED_SPACING-th
// point), one more per accepted seed. With the shared PRNG recipe this
// reproduces the server's accept/length decisions bit for bit, so a live
// preview shows exactly the drips a replay will.

import { BrushParams } from "./brush.js";
import * as config from "./config.js";
import { Centerline } from "./pipeline.js";
import { Xorshift64Star } from "./prng.js";
import { CanvasPlane } from "./plane.js";
import { Vec3, dot, norm } from "./vec.js";

export interface DripSeed {
    anchor: Vec3;
    length: number;
    width: number;
}

export class InvalidInputError extends Error {
    override name = "InvalidInputError";
}

/** In-plane unit direction drips flow along, or null for horizontal planes
 * where gravity has no in-plane component. */
export function dripGravityDir(plane: CanvasPlane): Vec3 | null {
    const g = config.GRAVITY;
    const gn = dot(g, plane.normal);
    const inPlane: Vec3 = [
        g[0] - gn * plane.normal[0],
        g[1] - gn * plane.normal[1],
        g[2] - gn * plane.normal[2],
    ];
    const n = norm(inPlane);
    if (n < 1e-9) {
        return null;
    }
    return [inPlane[0] / n, inPlane[1] / n, inPlane[2] / n];
}

/** Two-point tapered run for one drip seed, lifted off the wall like any
 * other 2D stroke geometry. */
export function dripCenterlineForSeed(
    seed: DripSeed,
    plane: CanvasPlane,
    t: number = 0.0,
    lift: number = config.CANVAS_LIFT,
): Centerline {
    const direction = dripGravityDir(plane);
    if (direction === null) {
        throw new InvalidInputError("drips are undefined on a horizontal canvas");
    }
    const start: Vec3 = [
        seed.anchor[0] + lift * plane.normal[0],
        seed.anchor[1] + lift * plane.normal[1],
        seed.anchor[2] + lift * plane.normal[2],
    ];
    const end: Vec3 = [
        start[0] + seed.length * direction[0],
        start[1] + seed.length * direction[1],
        start[2] + seed.length * direction[2],
    ];
    return new Centerline(
        [start, end],
        [t, t],
        "drip",
        [config.DRIP_WIDTH_START_FRACTION, config.DRIP_WIDTH_END_FRACTION],
    );
}

/** Seed drips along an on-plane centerline; returns accepted seeds and
 * their render centerlines. Points farther than 1e-4 m from the plane are
 * invalid input; horizontal planes yield no drips. */
export function dripSimulate(
    line: Centerline,
    plane: CanvasPlane,
    brush: BrushParams,
    rngSeed: bigint,
): { seeds: DripSeed[]; lines: Centerline[] } {
    if (brush.tool !== "drip") {
        throw new Error("dripSimulate requires a drip-mop brush");
    }
    const dist = line.points.map((p) => dot(p, plane.normal) - plane.offset);
    let maxAbs = 0.0;
    for (const d of dist) {
        maxAbs = Math.max(maxAbs, Math.abs(d));
    }
    if (maxAbs > 1e-4) {
        throw new InvalidInputError("drip centerline must lie on the canvas plane");
    }
    if (dripGravityDir(plane) === null) {
        return { seeds: [], lines: [] };
    }

    const rng = new Xorshift64Star(rngSeed);
    const lo = config.DRIP_LENGTH_FRACTION_MIN * brush.dripMaxLength;
    const hi = config.DRIP_LENGTH_FRACTION_MAX * brush.dripMaxLength;
    const width = config.DRIP_WIDTH_START_FRACTION * brush.baseWidth;
    const seeds: DripSeed[] = [];
    const lines: Centerline[] = [];
    for (let i = 0; i < line.length; i += config.DRIP_SEED_SPACING) {
        if (rng.nextFloat() >= brush.dripProbability) {
            continue;
        }
        const length = rng.uniform(lo, hi);
        const p = line.points[i];
        const anchor: Vec3 = [
            p[0] - dist[i] * plane.normal[0],
            p[1] - dist[i] * plane.normal[1],
            p[2] - dist[i] * plane.normal[2],
        ];
        const seed: DripSeed = { anchor, length, width };
        seeds.push(seed);
        lines.push(dripCenterlineForSeed(seed, plane, line.timestamps[i]));
    }
    return { seeds, lines };
}
