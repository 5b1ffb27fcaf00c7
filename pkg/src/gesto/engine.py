"""End-to-end composition: pose stream to strokes, meshes, and stats.

This is the shared path behind the CLI replay/pack commands and any client
that renders live drawing. Per stroke it runs segment, resample, smooth,
pressure, constrain, tessellate, and (for the drip mop on a canvas) drip
simulation, then merges everything into one mesh.

Stroke order follows the pose stream; stroke ids are 1-based positions in
that order. Drip randomness is decoupled per stroke so strokes can be
processed independently: stroke i uses the seed
``splitmix64((global_seed + i) mod 2**64)`` with i the 0-based stroke
index. That derivation is part of the reproducibility contract and must be
mirrored by any other implementation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import config
from .artwork_model import Artwork, PlacementTransform, Stroke
from .brush_mesh import (
    BrushParams,
    DripSeed,
    TriangleMesh,
    drip_centerline_for_seed,
    drip_simulate,
    merge_meshes,
    tessellate_ribbon,
    tessellate_tube,
    transform_mesh,
)
from .canvas_registration import CanvasPlane, DrawMode, constrain_stroke
from .errors import ModeError
from .geometry import quat_to_matrix
from .prng import splitmix64
from .stroke_pipeline import Centerline, NibOffset, PoseSample, Tool, resample, segment_strokes, smooth

_MASK64 = (1 << 64) - 1


def default_brushes() -> dict[Tool, BrushParams]:
    return {
        Tool.SPRAY: BrushParams(tool=Tool.SPRAY),
        Tool.DRIP_MOP: BrushParams(tool=Tool.DRIP_MOP),
    }


def derive_stroke_seed(global_seed: int, stroke_index: int) -> int:
    """Per-stroke drip seed; pinned cross-implementation, see module doc."""
    return splitmix64((global_seed + stroke_index) & _MASK64)


@dataclass(frozen=True)
class ReplaySettings:
    """Everything that parameterizes a replay besides the pose stream."""

    mode: DrawMode = DrawMode.FREE3D
    brushes: dict[Tool, BrushParams] = field(default_factory=default_brushes)
    nib_offset: NibOffset = field(default_factory=NibOffset)
    min_spacing: float = config.DEFAULT_MIN_SPACING
    smooth_window: int = config.DEFAULT_SMOOTH_WINDOW
    tube_sides: int = config.DEFAULT_TUBE_SIDES
    seed: int = 0


@dataclass(frozen=True)
class StrokeResult:
    centerline: Centerline
    mesh: TriangleMesh
    drip_seeds: tuple[DripSeed, ...]


@dataclass(frozen=True)
class ReplayResult:
    strokes: tuple[StrokeResult, ...]
    mesh: TriangleMesh

    @property
    def arc_length(self) -> float:
        return float(sum(s.centerline.arc_length() for s in self.strokes))

    def stats(self) -> dict:
        return {
            "strokes": len(self.strokes),
            "vertices": self.mesh.vertex_count,
            "triangles": self.mesh.triangle_count,
            "arc_length": self.arc_length,
        }

    def stats_line(self) -> str:
        return json.dumps(self.stats())


def spray_pressure(line: Centerline, plane: CanvasPlane | None, spray_range: float) -> Centerline:
    """Distance-based pressure for spray strokes; full pressure off-canvas."""
    if plane is None:
        return line
    dist = np.abs(line.points @ plane.normal - plane.offset)
    pressure = np.clip(1.0 - dist / spray_range, 0.0, 1.0)
    return line.with_pressure(pressure)


def prepare_centerline(
    line: Centerline, settings: ReplaySettings, plane: CanvasPlane | None
) -> Centerline:
    """Resample, smooth, derive pressure, then apply the mode constraint."""
    out = resample(line, settings.min_spacing)
    out = smooth(out, settings.smooth_window)
    if line.tool is Tool.SPRAY:
        # pressure reflects true nib-to-wall distance, so it is computed
        # before the constraint collapses that distance
        out = spray_pressure(out, plane, settings.brushes[Tool.SPRAY].spray_range)
    return constrain_stroke(out, plane, settings.mode)


def process_stroke(
    line: Centerline,
    settings: ReplaySettings,
    plane: CanvasPlane | None,
    stroke_index: int,
) -> StrokeResult:
    brush = settings.brushes[line.tool]
    final = prepare_centerline(line, settings, plane)
    drip_seeds: tuple[DripSeed, ...] = ()
    parts = []
    if settings.mode is DrawMode.CANVAS2D:
        assert plane is not None  # constrain_stroke already rejected this
        parts.append(tessellate_ribbon(final, brush, plane.normal))
        if line.tool is Tool.DRIP_MOP:
            on_plane = final.with_points(final.points - config.CANVAS_LIFT * plane.normal)
            seeds, drip_lines = drip_simulate(
                on_plane, plane, brush, derive_stroke_seed(settings.seed, stroke_index)
            )
            drip_seeds = tuple(seeds)
            parts.extend(tessellate_ribbon(d, brush, plane.normal) for d in drip_lines)
    else:
        parts.append(tessellate_tube(final, brush, settings.tube_sides))
    return StrokeResult(
        centerline=final, mesh=merge_meshes(parts), drip_seeds=drip_seeds
    )


def replay(
    samples: list[PoseSample],
    settings: ReplaySettings,
    plane: CanvasPlane | None = None,
) -> ReplayResult:
    lines = segment_strokes(samples, settings.nib_offset)
    results = tuple(
        process_stroke(line, settings, plane, i) for i, line in enumerate(lines)
    )
    return ReplayResult(strokes=results, mesh=merge_meshes(r.mesh for r in results))


def pack_artwork(
    samples: list[PoseSample],
    settings: ReplaySettings,
    plane: CanvasPlane | None,
    artwork_id: str,
    author: str,
    title: str,
    created_at: float | None = None,
) -> Artwork:
    """Replay the stream and freeze the result into a persistable artwork.

    created_at defaults to the last sample time so packing is deterministic
    for fixed inputs.
    """
    result = replay(samples, settings, plane)
    if created_at is None:
        created_at = float(samples[-1].t) if samples else 0.0
    strokes = tuple(
        Stroke(
            id=i + 1,
            centerline=r.centerline,
            brush=settings.brushes[r.centerline.tool],
            mode=settings.mode,
            drips=r.drip_seeds,
        )
        for i, r in enumerate(result.strokes)
    )
    return Artwork(
        artwork_id=artwork_id,
        author=author,
        title=title,
        created_at=created_at,
        canvas=plane if settings.mode is DrawMode.CANVAS2D else None,
        strokes=strokes,
    )


def stroke_mesh(
    stroke: Stroke, canvas: CanvasPlane | None, tube_sides: int = config.DEFAULT_TUBE_SIDES
) -> TriangleMesh:
    """Re-tessellate a stored stroke, drips included; no randomness."""
    if stroke.mode is DrawMode.CANVAS2D:
        if canvas is None:
            raise ModeError("2D stroke requires the artwork canvas")
        parts = [tessellate_ribbon(stroke.centerline, stroke.brush, canvas.normal)]
        parts.extend(
            tessellate_ribbon(
                drip_centerline_for_seed(seed, canvas, stroke.brush), stroke.brush, canvas.normal
            )
            for seed in stroke.drips
        )
        return merge_meshes(parts)
    return tessellate_tube(stroke.centerline, stroke.brush, tube_sides)


def artwork_mesh(artwork: Artwork, tube_sides: int = config.DEFAULT_TUBE_SIDES) -> TriangleMesh:
    """Tessellation of every stored stroke in local (unplaced) coordinates."""
    return merge_meshes(
        stroke_mesh(s, artwork.canvas, tube_sides) for s in artwork.strokes
    )


def placed_mesh(artwork: Artwork, tube_sides: int = config.DEFAULT_TUBE_SIDES) -> TriangleMesh:
    """Tessellation with the placement transform applied."""
    local = artwork_mesh(artwork, tube_sides)
    p: PlacementTransform = artwork.placement
    return transform_mesh(
        local, rotation=quat_to_matrix(p.rotation), translation=p.translation, scale=p.scale
    )
