"""Wall-canvas registration and drawing-mode constraints.

A scanned point sample set becomes a fitted plane with in-plane axes and
padded bounds; strokes drawn in 2D mode are projected onto that plane with
a small outward lift so they never z-fight the wall.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import config
from .errors import (
    DegenerateScanError,
    ModeError,
    NoisyScanError,
    ParameterError,
    PoseLogError,
)
from .geometry import as_vec3, normalize, readonly
from .stroke_pipeline import Centerline

_AXIS_TOL = 1e-6
_SIGN_TOL = 1e-9


class DrawMode(enum.Enum):
    """Wall-constrained 2D drawing versus free spatial strokes."""

    CANVAS2D = "2d"
    FREE3D = "3d"


@dataclass(frozen=True)
class CanvasPlane:
    """A registered wall: the plane {x : normal . x = offset} with in-plane
    axes, padded sample bounds (u_min, u_max, v_min, v_max), and the RMS of
    the fit residual."""

    normal: np.ndarray
    offset: float
    u_axis: np.ndarray
    v_axis: np.ndarray
    bounds: tuple[float, float, float, float]
    fit_rms: float

    def __post_init__(self):
        n = readonly(as_vec3(self.normal))
        u = readonly(as_vec3(self.u_axis))
        v = readonly(as_vec3(self.v_axis))
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "u_axis", u)
        object.__setattr__(self, "v_axis", v)
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "fit_rms", float(self.fit_rms))
        if abs(np.linalg.norm(n) - 1.0) > _AXIS_TOL:
            raise ParameterError("plane normal must be unit length")
        for a, b, name in ((u, v, "u.v"), (u, n, "u.n"), (v, n, "v.n")):
            if abs(float(np.dot(a, b))) > _AXIS_TOL:
                raise ParameterError(f"plane axes not orthogonal ({name})")
        u_min, u_max, v_min, v_max = self.bounds
        if not (u_min < u_max and v_min < v_max):
            raise ParameterError("plane bounds are empty")
        if self.fit_rms < 0.0:
            raise ParameterError("fit_rms must be nonnegative")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CanvasPlane):
            return NotImplemented
        return (
            np.array_equal(self.normal, other.normal)
            and self.offset == other.offset
            and np.array_equal(self.u_axis, other.u_axis)
            and np.array_equal(self.v_axis, other.v_axis)
            and self.bounds == other.bounds
            and self.fit_rms == other.fit_rms
        )

    def __hash__(self):
        return hash((self.normal.tobytes(), self.offset, self.bounds))

    @property
    def origin(self) -> np.ndarray:
        return self.offset * self.normal

    def signed_distance(self, point) -> float:
        return float(np.dot(self.normal, as_vec3(point)) - self.offset)


@dataclass(frozen=True)
class ProjectedPoint:
    """Result of dropping a point onto the canvas: in-plane (u, v) meters,
    the world-space foot point, and the signed off-plane distance."""

    uv: np.ndarray
    world: np.ndarray
    distance: float


def _orient_normal(normal: np.ndarray, view_dir) -> np.ndarray:
    """Resolve the fitted normal's sign.

    With a view direction the normal faces the viewer (dot < 0). Otherwise
    prefer a positive z component, falling back to x then y when earlier
    components are zero, so the choice is deterministic for walls whose
    normal is perpendicular to z.
    """
    if view_dir is not None:
        d = float(np.dot(normal, as_vec3(view_dir)))
        if d > 0.0:
            return -normal
        if d < 0.0:
            return normal
    for i in (2, 0, 1):
        if normal[i] > _SIGN_TOL:
            return normal
        if normal[i] < -_SIGN_TOL:
            return -normal
    return normal


def fit_plane(samples, max_rms: float, view_dir=None) -> CanvasPlane:
    """Least-squares plane through scanned points.

    The plane passes through the centroid with normal along the direction of
    least variance (computed via SVD of the centered samples). The in-plane
    u axis is horizontal for wall-like planes (world up crossed with the
    normal), with a world-x fallback for floors and ceilings; v completes
    the right-handed frame. Bounds are the sample extent in (u, v) padded by
    ``config.CANVAS_BOUNDS_PADDING``.

    Raises DegenerateScanError for fewer than 3 effective points or
    collinear samples, NoisyScanError when the fit RMS exceeds ``max_rms``.
    """
    pts = np.asarray(samples, dtype=np.float64).reshape(-1, 3)
    if not np.all(np.isfinite(pts)):
        raise ParameterError("scan samples must be finite")
    if len(pts) < 3:
        raise DegenerateScanError(f"need at least 3 samples, got {len(pts)}")

    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    # Singular values descend; collinear scans leave only one meaningful one.
    if sv[1] ** 2 <= sv[0] ** 2 * 1e-12:
        raise DegenerateScanError("scan samples are collinear")

    normal = _orient_normal(normalize(vt[2]), view_dir)
    offset = float(np.dot(normal, centroid))
    residual = centered @ normal
    fit_rms = float(np.sqrt(np.mean(residual**2)))
    if fit_rms > max_rms:
        raise NoisyScanError(f"fit rms {fit_rms:.4f} m exceeds limit {max_rms} m")

    up = np.array(config.WORLD_UP)
    u_cand = np.cross(up, normal)
    if np.linalg.norm(u_cand) <= 1e-3:
        u_cand = np.cross(np.array([1.0, 0.0, 0.0]), normal)
    u_axis = normalize(u_cand)
    v_axis = np.cross(normal, u_axis)

    rel = pts - offset * normal
    us = rel @ u_axis
    vs = rel @ v_axis
    pad = config.CANVAS_BOUNDS_PADDING
    bounds = (float(us.min()) - pad, float(us.max()) + pad,
              float(vs.min()) - pad, float(vs.max()) + pad)
    return CanvasPlane(normal, offset, u_axis, v_axis, bounds, fit_rms)


def project_to_canvas(point, plane: CanvasPlane) -> ProjectedPoint:
    """Orthogonal projection of a world point onto the canvas plane."""
    p = as_vec3(point)
    distance = float(np.dot(plane.normal, p) - plane.offset)
    world = p - distance * plane.normal
    rel = world - plane.origin
    uv = np.array([float(np.dot(rel, plane.u_axis)), float(np.dot(rel, plane.v_axis))])
    return ProjectedPoint(uv=readonly(uv), world=readonly(world), distance=distance)


def constrain_stroke(line: Centerline, plane: CanvasPlane | None, mode: DrawMode) -> Centerline:
    """Apply the drawing-mode constraint to a centerline.

    2D mode projects every point onto the canvas and lifts it outward by
    ``config.CANVAS_LIFT`` along the normal; 3D mode passes the line through
    unchanged.
    """
    if mode is DrawMode.FREE3D:
        return line
    if plane is None:
        raise ModeError("2D mode requires a registered canvas plane")
    dist = line.points @ plane.normal - plane.offset
    projected = line.points - dist[:, None] * plane.normal[None, :]
    lifted = projected + config.CANVAS_LIFT * plane.normal[None, :]
    return line.with_points(lifted)


# ---------------------------------------------------------------------------
# Scan-sample fixture format: JSON Lines of [x, y, z] arrays, meters.


def parse_scan_samples(lines: Iterable[str]) -> np.ndarray:
    pts = []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            arr = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise PoseLogError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        if not isinstance(arr, list) or len(arr) != 3:
            raise PoseLogError("expected an [x, y, z] array", line=lineno)
        try:
            pts.append([float(x) for x in arr])
        except (TypeError, ValueError) as exc:
            raise PoseLogError(f"bad coordinate: {exc}", line=lineno) from exc
    return np.asarray(pts, dtype=np.float64).reshape(-1, 3)


def read_scan_samples(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scan_samples(fh)


def write_scan_samples(samples, path) -> None:
    pts = np.asarray(samples, dtype=np.float64).reshape(-1, 3)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pts:
            fh.write(json.dumps(p.tolist()) + "\n")
