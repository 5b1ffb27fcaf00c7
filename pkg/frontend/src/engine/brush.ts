// Brush parameters shared by both tools, plus the spray models: the
// distance-based pressure used for live width feedback and the elliptical
// wall footprint shown while aiming.

import * as config from "./config.js";
import { Centerline, Tool } from "./pipeline.js";
import { CanvasPlane } from "./plane.js";
import { Vec3, dot, norm, normalize } from "./vec.js";

export interface BrushParams {
    tool: Tool;
    baseWidth: number;
    color: [number, number, number, number];
    sprayConeHalfAngle: number;
    sprayRange: number;
    dripProbability: number;
    dripMaxLength: number;
}

export function makeBrush(tool: Tool, overrides: Partial<BrushParams> = {}): BrushParams {
    const brush: BrushParams = {
        tool,
        baseWidth: config.DEFAULT_BASE_WIDTH,
        color: [...config.DEFAULT_COLOR],
        sprayConeHalfAngle: config.DEFAULT_SPRAY_HALF_ANGLE,
        sprayRange: config.DEFAULT_SPRAY_RANGE,
        dripProbability: config.DEFAULT_DRIP_PROBABILITY,
        dripMaxLength: config.DEFAULT_DRIP_MAX_LENGTH,
        ...overrides,
    };
    if (!(brush.baseWidth > 0.0)) {
        throw new Error(`base_width must be positive, got ${brush.baseWidth}`);
    }
    if (brush.color.length !== 4 || brush.color.some((c) => !(c >= 0.0 && c <= 1.0))) {
        throw new Error(`color channels must lie in [0, 1], got ${brush.color}`);
    }
    if (!(brush.sprayConeHalfAngle > 0.0 && brush.sprayConeHalfAngle <= Math.PI / 4 + 1e-7)) {
        throw new Error(`spray cone half angle must be in (0, pi/4], got ${brush.sprayConeHalfAngle}`);
    }
    if (!(brush.sprayRange > 0.0)) {
        throw new Error(`spray_range must be positive, got ${brush.sprayRange}`);
    }
    if (!(brush.dripProbability >= 0.0 && brush.dripProbability <= 1.0)) {
        throw new Error(`drip_probability must be in [0, 1], got ${brush.dripProbability}`);
    }
    if (!(brush.dripMaxLength >= 0.0)) {
        throw new Error(`drip_max_length must be nonnegative, got ${brush.dripMaxLength}`);
    }
    return brush;
}

/** Distance-based pressure for spray strokes; full pressure off-canvas. */
export function sprayPressure(
    line: Centerline,
    plane: CanvasPlane | null,
    sprayRange: number,
): Centerline {
    if (plane === null) {
        return line;
    }
    const pressure = line.points.map((p) => {
        const dist = Math.abs(dot(p, plane.normal) - plane.offset);
        const v = 1.0 - dist / sprayRange;
        return v < 0.0 ? 0.0 : v > 1.0 ? 1.0 : v;
    });
    return line.withPressure(pressure);
}

export interface SprayFootprint {
    center: Vec3;
    semiMajor: number;
    semiMinor: number;
    majorAxisDir: Vec3;
}

/** Elliptical spot where the spray cone meets the canvas, or null when the
 * aim ray is parallel, points away, or hits beyond the spray range. */
export function sprayFootprint(
    nib: Vec3,
    deviceForward: Vec3,
    plane: CanvasPlane,
    brush: BrushParams,
): SprayFootprint | null {
    if (brush.tool !== "spray") {
        throw new Error("sprayFootprint requires a spray brush");
    }
    const forward = normalize(deviceForward);
    const denom = dot(forward, plane.normal);
    if (Math.abs(denom) < 1e-6) {
        return null;
    }
    const d = (plane.offset - dot(plane.normal, nib)) / denom;
    if (d <= 0.0 || d > brush.sprayRange) {
        return null;
    }
    const center: Vec3 = [nib[0] + d * forward[0], nib[1] + d * forward[1], nib[2] + d * forward[2]];
    const semiMinor = d * Math.tan(brush.sprayConeHalfAngle);
    const cosInc = Math.max(Math.abs(denom), config.SPRAY_COS_CLAMP);
    const semiMajor = semiMinor / cosInc;
    const inPlane: Vec3 = [
        forward[0] - denom * plane.normal[0],
        forward[1] - denom * plane.normal[1],
        forward[2] - denom * plane.normal[2],
    ];
    const nIp = norm(inPlane);
    const majorAxisDir = nIp < 1e-9 ? plane.uAxis : ([inPlane[0] / nIp, inPlane[1] / nIp, inPlane[2] / nIp] as Vec3);
    return { center, semiMajor, semiMinor, majorAxisDir };
}
