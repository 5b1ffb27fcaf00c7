"""Centerlines to renderable triangle meshes.

Wall-mode strokes become flat ribbons facing the canvas; free-space strokes
become parallel-transport tubes that stay visible from any angle. The spray
tool additionally exposes its elliptical wall footprint for live feedback,
and the drip mop grows seeded, gravity-aligned runs simulated with a
portable deterministic PRNG (see ``gesto.prng``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .canvas_registration import CanvasPlane
from .errors import InvalidInputError, ParameterError
from .geometry import as_vec3, normalize, perpendicular, readonly
from .prng import Xorshift64Star
from .stroke_pipeline import Centerline, Tool

_NORMAL_TOL = 1e-5
# Slack on the upper cone-angle bound so float32-quantized values of the
# exact limit still validate.
_ANGLE_SLACK = 1e-7


@dataclass(frozen=True)
class BrushParams:
    """Brush settings shared by both tools.

    The spray fields describe an emission cone (half angle, reach); the drip
    fields control seeding probability and maximum run length. Fields not
    relevant to ``tool`` are carried but unused.
    """

    tool: Tool = Tool.SPRAY
    base_width: float = config.DEFAULT_BASE_WIDTH
    color: tuple[float, float, float, float] = config.DEFAULT_COLOR
    spray_cone_half_angle: float = config.DEFAULT_SPRAY_HALF_ANGLE
    spray_range: float = config.DEFAULT_SPRAY_RANGE
    drip_probability: float = config.DEFAULT_DRIP_PROBABILITY
    drip_max_length: float = config.DEFAULT_DRIP_MAX_LENGTH

    def __post_init__(self):
        object.__setattr__(self, "color", tuple(float(c) for c in self.color))
        if not self.base_width > 0.0:
            raise ParameterError(f"base_width must be positive, got {self.base_width}")
        if len(self.color) != 4 or any(not (0.0 <= c <= 1.0) for c in self.color):
            raise ParameterError(f"color channels must lie in [0, 1], got {self.color}")
        if not (0.0 < self.spray_cone_half_angle <= math.pi / 4 + _ANGLE_SLACK):
            raise ParameterError(
                f"spray_cone_half_angle must be in (0, pi/4], got {self.spray_cone_half_angle}"
            )
        if not self.spray_range > 0.0:
            raise ParameterError(f"spray_range must be positive, got {self.spray_range}")
        if not 0.0 <= self.drip_probability <= 1.0:
            raise ParameterError(
                f"drip_probability must be in [0, 1], got {self.drip_probability}"
            )
        if self.drip_max_length < 0.0:
            raise ParameterError(
                f"drip_max_length must be nonnegative, got {self.drip_max_length}"
            )


class TriangleMesh:
    """Indexed triangle mesh: vertices (V,3), unit normals (V,3), RGBA colors
    (V,4), and a flat uint32 index array whose length is a multiple of 3.
    Immutable."""

    __slots__ = ("vertices", "normals", "colors", "indices")

    def __init__(self, vertices, normals, colors, indices):
        v = readonly(np.asarray(vertices, dtype=np.float64).reshape(-1, 3))
        n = readonly(np.asarray(normals, dtype=np.float64).reshape(-1, 3))
        c = readonly(np.asarray(colors, dtype=np.float64).reshape(-1, 4))
        idx = readonly(np.asarray(indices, dtype=np.uint32).reshape(-1))
        if not (len(v) == len(n) == len(c)):
            raise ParameterError("vertex, normal, and color counts must match")
        if len(idx) % 3 != 0:
            raise ParameterError("index count must be a multiple of 3")
        if len(idx) and (idx.max() >= len(v)):
            raise ParameterError("index out of range")
        if len(v):
            if not np.all(np.isfinite(v)) or not np.all(np.isfinite(n)) or not np.all(np.isfinite(c)):
                raise ParameterError("mesh arrays contain non-finite values")
            norms = np.linalg.norm(n, axis=1)
            if np.any(np.abs(norms - 1.0) > _NORMAL_TOL):
                raise ParameterError("normals must be unit length")
        self.vertices = v
        self.normals = n
        self.colors = c
        self.indices = idx

    @staticmethod
    def empty() -> "TriangleMesh":
        return TriangleMesh(
            np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 4)), np.zeros(0, dtype=np.uint32)
        )

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def triangle_count(self) -> int:
        return len(self.indices) // 3

    def __eq__(self, other) -> bool:
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.normals, other.normals)
            and np.array_equal(self.colors, other.colors)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.vertices.tobytes(), self.indices.tobytes()))

    def __repr__(self):
        return f"TriangleMesh({self.vertex_count} vertices, {self.triangle_count} triangles)"


@dataclass(frozen=True)
class DripSeed:
    """One accepted drip: its on-canvas anchor, run length, and start width."""

    anchor: np.ndarray
    length: float
    width: float

    def __post_init__(self):
        a = readonly(as_vec3(self.anchor))
        object.__setattr__(self, "anchor", a)
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "width", float(self.width))
        if not np.all(np.isfinite(a)):
            raise ParameterError("drip anchor must be finite")
        if self.length < 0.0 or not math.isfinite(self.length):
            raise ParameterError("drip length must be finite and nonnegative")
        if self.width <= 0.0 or not math.isfinite(self.width):
            raise ParameterError("drip width must be finite and positive")

    def __eq__(self, other) -> bool:
        if not isinstance(other, DripSeed):
            return NotImplemented
        return (
            np.array_equal(self.anchor, other.anchor)
            and self.length == other.length
            and self.width == other.width
        )

    def __hash__(self):
        return hash((self.anchor.tobytes(), self.length, self.width))


@dataclass(frozen=True)
class SprayFootprint:
    """Elliptical spray spot on the canvas."""

    center: np.ndarray
    semi_major: float
    semi_minor: float
    major_axis_dir: np.ndarray


def _dedupe(points: np.ndarray, pressure: np.ndarray):
    """Drop exactly coincident consecutive points."""
    if len(points) < 2:
        return points, pressure
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    keep = np.concatenate([[True], seg > 0.0])
    return points[keep], pressure[keep]


def _tangents(points: np.ndarray) -> np.ndarray:
    """Per-point unit tangents: central differences inside, one-sided at the
    ends. Points are assumed deduplicated."""
    n = len(points)
    t = np.empty_like(points)
    t[0] = points[1] - points[0]
    t[-1] = points[-1] - points[-2]
    if n > 2:
        t[1:-1] = points[2:] - points[:-2]
    lengths = np.linalg.norm(t, axis=1)
    # A central difference can vanish on an exact back-track; fall back to
    # the forward difference, which is nonzero after deduplication.
    for i in np.nonzero(lengths == 0.0)[0]:
        fwd = points[i + 1] - points[i]
        t[i] = fwd
        lengths[i] = np.linalg.norm(fwd)
    return t / lengths[:, None]


def tessellate_ribbon(line: Centerline, params: BrushParams, facing_normal) -> TriangleMesh:
    """Flat ribbon along a centerline, facing ``facing_normal``.

    Each of the N centerline points spawns a vertex pair offset by half the
    local width along tangent x facing_normal, giving exactly 2N vertices
    and 2(N-1) triangles. Local width is base_width scaled by the per-point
    pressure. Fewer than 2 distinct points yield an empty mesh.
    """
    normal = normalize(as_vec3(facing_normal))
    pts, pressure = _dedupe(line.points, line.pressure)
    n = len(pts)
    if n < 2:
        return TriangleMesh.empty()

    tangents = _tangents(pts)
    sides = np.cross(tangents, normal[None, :])
    side_len = np.linalg.norm(sides, axis=1)
    for i in np.nonzero(side_len < 1e-9)[0]:
        # Tangent parallel to the facing direction; any perpendicular works.
        sides[i] = perpendicular(tangents[i])
        side_len[i] = 1.0
    sides /= side_len[:, None]

    half_w = 0.5 * params.base_width * pressure
    verts = np.empty((2 * n, 3))
    verts[0::2] = pts + sides * half_w[:, None]
    verts[1::2] = pts - sides * half_w[:, None]
    normals = np.tile(normal, (2 * n, 1))
    colors = np.tile(np.asarray(params.color, dtype=np.float64), (2 * n, 1))

    idx = np.empty((n - 1, 6), dtype=np.uint32)
    base = 2 * np.arange(n - 1, dtype=np.uint32)
    idx[:, 0] = base
    idx[:, 1] = base + 1
    idx[:, 2] = base + 2
    idx[:, 3] = base + 1
    idx[:, 4] = base + 3
    idx[:, 5] = base + 2
    return TriangleMesh(verts, normals, colors, idx.reshape(-1))


def tessellate_tube(line: Centerline, params: BrushParams, sides: int) -> TriangleMesh:
    """Sweep a regular polygon along the centerline with parallel-transport
    frames.

    Emits N*sides vertices and 2*(N-1)*sides triangles; the polygon diameter
    is base_width scaled by per-point pressure. End caps are not generated.
    """
    if sides < 3:
        raise ParameterError(f"a tube needs at least 3 sides, got {sides}")
    pts, pressure = _dedupe(line.points, line.pressure)
    n = len(pts)
    if n < 2:
        return TriangleMesh.empty()

    tangents = _tangents(pts)
    frames_n = np.empty_like(pts)
    frames_b = np.empty_like(pts)
    frames_n[0] = perpendicular(tangents[0])
    frames_b[0] = np.cross(tangents[0], frames_n[0])
    for i in range(1, n):
        prev_t, cur_t = tangents[i - 1], tangents[i]
        axis = np.cross(prev_t, cur_t)
        s = np.linalg.norm(axis)
        c = float(np.dot(prev_t, cur_t))
        if s < 1e-12:
            rotated = frames_n[i - 1] if c > 0.0 else -frames_n[i - 1]
        else:
            k = axis / s
            v = frames_n[i - 1]
            rotated = v * c + np.cross(k, v) * s + k * np.dot(k, v) * (1.0 - c)
        # Re-orthogonalize against the new tangent to stop drift.
        rotated = rotated - np.dot(rotated, cur_t) * cur_t
        frames_n[i] = normalize(rotated)
        frames_b[i] = np.cross(cur_t, frames_n[i])

    theta = 2.0 * math.pi * np.arange(sides) / sides
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    radius = 0.5 * params.base_width * pressure

    # ring_dirs[i, j] = cos(theta_j) * n_i + sin(theta_j) * b_i
    ring_dirs = cos_t[None, :, None] * frames_n[:, None, :] + sin_t[None, :, None] * frames_b[:, None, :]
    verts = (pts[:, None, :] + radius[:, None, None] * ring_dirs).reshape(-1, 3)
    normals = ring_dirs.reshape(-1, 3)
    colors = np.tile(np.asarray(params.color, dtype=np.float64), (n * sides, 1))

    idx = np.empty((n - 1, sides, 6), dtype=np.uint32)
    ring = np.arange(sides, dtype=np.uint32)
    nxt = (ring + 1) % sides
    for i in range(n - 1):
        a = i * sides + ring
        b = i * sides + nxt
        c2 = (i + 1) * sides + ring
        d = (i + 1) * sides + nxt
        idx[i, :, 0] = a
        idx[i, :, 1] = c2
        idx[i, :, 2] = b
        idx[i, :, 3] = b
        idx[i, :, 4] = c2
        idx[i, :, 5] = d
    return TriangleMesh(verts, normals, colors, idx.reshape(-1))


def spray_footprint(nib, device_forward, plane: CanvasPlane, params: BrushParams) -> SprayFootprint | None:
    """Elliptical spot where the spray cone meets the canvas, or None.

    None when the aim ray is parallel to the plane, points away from it, or
    the hit lies beyond the spray range. At hit distance d the minor radius
    is d*tan(half_angle); the major radius divides by |cos| of the incidence
    angle, clamped at ``config.SPRAY_COS_CLAMP`` so grazing hits stay
    bounded. The major axis follows the in-plane component of the aim
    direction (canvas u axis at normal incidence).
    """
    if params.tool is not Tool.SPRAY:
        raise ParameterError("spray_footprint requires a spray brush")
    origin = as_vec3(nib)
    forward = normalize(as_vec3(device_forward))
    denom = float(np.dot(forward, plane.normal))
    if abs(denom) < 1e-6:
        return None
    d = (plane.offset - float(np.dot(plane.normal, origin))) / denom
    if d <= 0.0 or d > params.spray_range:
        return None
    center = origin + d * forward
    semi_minor = d * math.tan(params.spray_cone_half_angle)
    cos_inc = max(abs(denom), config.SPRAY_COS_CLAMP)
    semi_major = semi_minor / cos_inc
    in_plane = forward - denom * plane.normal
    n_ip = np.linalg.norm(in_plane)
    major_dir = plane.u_axis if n_ip < 1e-9 else in_plane / n_ip
    return SprayFootprint(
        center=readonly(center),
        semi_major=semi_major,
        semi_minor=semi_minor,
        major_axis_dir=readonly(major_dir),
    )


def drip_gravity_dir(plane: CanvasPlane) -> np.ndarray | None:
    """In-plane unit direction drips flow along, or None for horizontal
    planes where gravity has no in-plane component."""
    g = np.array(config.GRAVITY)
    in_plane = g - float(np.dot(g, plane.normal)) * plane.normal
    norm = np.linalg.norm(in_plane)
    if norm < 1e-9:
        return None
    return in_plane / norm


def drip_centerline_for_seed(seed: DripSeed, plane: CanvasPlane, params: BrushParams,
                             t: float = 0.0, lift: float = config.CANVAS_LIFT) -> Centerline:
    """Two-point tapered run for one drip seed, lifted off the wall like any
    other 2D stroke geometry."""
    direction = drip_gravity_dir(plane)
    if direction is None:
        raise InvalidInputError("drips are undefined on a horizontal canvas")
    start = seed.anchor + lift * plane.normal
    end = start + seed.length * direction
    return Centerline(
        np.vstack([start, end]),
        np.array([t, t]),
        Tool.DRIP_MOP,
        np.array([config.DRIP_WIDTH_START_FRACTION, config.DRIP_WIDTH_END_FRACTION]),
    )


def drip_simulate(line: Centerline, plane: CanvasPlane, params: BrushParams,
                  rng_seed: int) -> tuple[list[DripSeed], list[Centerline]]:
    """Seed gravity drips along an on-plane drip-mop centerline.

    Every ``config.DRIP_SEED_SPACING``-th point is a candidate; each is
    accepted with probability ``drip_probability`` and, when accepted, gets
    a length uniform in the configured fraction band of ``drip_max_length``.
    Draw order is fixed (one float per candidate, one more per accepted
    seed) so a given ``rng_seed`` always reproduces the same drips.
    Horizontal planes yield no drips. Points farther than 1e-4 m from the
    plane are rejected as invalid input.
    """
    if params.tool is not Tool.DRIP_MOP:
        raise ParameterError("drip_simulate requires a drip-mop brush")
    dist = line.points @ plane.normal - plane.offset
    if np.max(np.abs(dist)) > 1e-4:
        raise InvalidInputError("drip centerline must lie on the canvas plane")
    if drip_gravity_dir(plane) is None:
        return [], []

    rng = Xorshift64Star(rng_seed)
    lo = config.DRIP_LENGTH_FRACTION_MIN * params.drip_max_length
    hi = config.DRIP_LENGTH_FRACTION_MAX * params.drip_max_length
    width = config.DRIP_WIDTH_START_FRACTION * params.base_width
    seeds: list[DripSeed] = []
    lines: list[Centerline] = []
    for i in range(0, len(line), config.DRIP_SEED_SPACING):
        if rng.next_float() >= params.drip_probability:
            continue
        length = rng.uniform(lo, hi)
        anchor = line.points[i] - dist[i] * plane.normal
        seed = DripSeed(anchor=anchor, length=length, width=width)
        seeds.append(seed)
        lines.append(drip_centerline_for_seed(seed, plane, params, t=float(line.timestamps[i])))
    return seeds, lines


def merge_meshes(meshes) -> TriangleMesh:
    """Concatenate meshes, rebasing indices."""
    meshes = list(meshes)
    if not meshes:
        return TriangleMesh.empty()
    verts = np.vstack([m.vertices for m in meshes])
    normals = np.vstack([m.normals for m in meshes])
    colors = np.vstack([m.colors for m in meshes])
    parts = []
    base = 0
    for m in meshes:
        parts.append(m.indices.astype(np.uint32) + np.uint32(base))
        base += m.vertex_count
    indices = np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint32)
    return TriangleMesh(verts, normals, colors, indices)


def transform_mesh(mesh: TriangleMesh, rotation=None, translation=None, scale: float = 1.0) -> TriangleMesh:
    """Apply translate/rotate/uniform-scale to a mesh; normals rotate only."""
    if scale <= 0.0:
        raise ParameterError("scale must be positive")
    verts = mesh.vertices * scale
    normals = mesh.normals
    if rotation is not None:
        r = np.asarray(rotation, dtype=np.float64)
        verts = verts @ r.T
        normals = normals @ r.T
    if translation is not None:
        verts = verts + as_vec3(translation)[None, :]
    return TriangleMesh(verts, normals, mesh.colors, mesh.indices)
