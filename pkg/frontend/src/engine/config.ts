// Engine constants, kept numerically identical to the server engine's
// config module so replayed geometry and drip decisions agree.

import type { Vec3 } from "./vec.js";

export const DEFAULT_NIB_OFFSET: Vec3 = [0.0, 0.08, 0.0];
export const MAX_NIB_OFFSET = 0.5;

export const DEFAULT_MIN_SPACING = 0.005;
export const DEFAULT_SMOOTH_WINDOW = 3;

export const DEFAULT_BASE_WIDTH = 0.05;
export const DEFAULT_COLOR: [number, number, number, number] = [0.9, 0.15, 0.2, 1.0];
// 15 degrees, computed as degrees * (pi/180) to match the reference value bit for bit
const DEG = Math.PI / 180.0;
export const DEFAULT_SPRAY_HALF_ANGLE = 15.0 * DEG;
export const DEFAULT_SPRAY_RANGE = 0.5;
export const DEFAULT_DRIP_PROBABILITY = 0.3;
export const DEFAULT_DRIP_MAX_LENGTH = 0.2;

export const DEFAULT_TUBE_SIDES = 8;

export const SPRAY_COS_CLAMP = 0.1;

export const DRIP_SEED_SPACING = 4;
export const DRIP_LENGTH_FRACTION_MIN = 0.3;
export const DRIP_LENGTH_FRACTION_MAX = 1.0;
export const DRIP_WIDTH_START_FRACTION = 0.4;
export const DRIP_WIDTH_END_FRACTION = 0.15;

export const GRAVITY: Vec3 = [0.0, -1.0, 0.0];
export const WORLD_UP: Vec3 = [0.0, 1.0, 0.0];

export const CANVAS_LIFT = 0.001;
export const CANVAS_BOUNDS_PADDING = 0.05;
export const DEFAULT_SCAN_MAX_RMS = 0.02;

export const MAX_AUTHOR_BYTES = 64;
export const MAX_TITLE_BYTES = 256;
