// Minimal 3-vector and quaternion helpers. Quaternions are (w, x, y, z)
// and expected to be unit norm.
//
// Operation order inside each function mirrors the server engine exactly
// (left-to-right sums, separate multiply and add), because replay parity
// depends on producing the same IEEE doubles for the same inputs.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export const QUAT_NORM_TOL = 1e-6;

export function add(a: Vec3, b: Vec3): Vec3 {
    return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
    return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function scale(a: Vec3, s: number): Vec3 {
    return [a[0] * s, a[1] * s, a[2] * s];
}

export function dot(a: Vec3, b: Vec3): number {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
}

export function norm(a: Vec3): number {
    return Math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

export function normalize(a: Vec3): Vec3 {
    const n = norm(a);
    if (n === 0.0) {
        throw new Error("cannot normalize a zero vector");
    }
    return [a[0] / n, a[1] / n, a[2] / n];
}

/** Any unit vector perpendicular to unit vector v; deterministic. */
export function perpendicular(v: Vec3): Vec3 {
    const ref: Vec3 = Math.abs(v[1]) < 0.9 ? [0.0, 1.0, 0.0] : [1.0, 0.0, 0.0];
    return normalize(cross(ref, v));
}

export function quatIsUnit(q: Quat, tol: number = QUAT_NORM_TOL): boolean {
    const n = Math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    return Math.abs(n - 1.0) <= tol;
}

/** Rotate v by unit quaternion q via v' = v + 2*u x (u x v + w*v). */
export function quatRotate(q: Quat, v: Vec3): Vec3 {
    const w = q[0];
    const u: Vec3 = [q[1], q[2], q[3]];
    const t = cross(u, v);
    const inner: Vec3 = [t[0] + w * v[0], t[1] + w * v[1], t[2] + w * v[2]];
    const c = cross(u, inner);
    return [v[0] + 2.0 * c[0], v[1] + 2.0 * c[1], v[2] + 2.0 * c[2]];
}

/** Row-major 3x3 rotation matrix for unit quaternion q. */
export function quatToMatrix(q: Quat): number[][] {
    const [w, x, y, z] = q;
    return [
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ];
}

export function matApply(m: number[][], v: Vec3): Vec3 {
    return [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ];
}
