"""The persistent artwork aggregate and its wire formats.

An artwork is a named, ordered collection of strokes plus a placement
transform (translate, rotate, uniform scale) driven by the tap/pinch/drag
gestures. It serializes to a compact versioned binary ("GSTB", format 1)
used by the persistence service and the CLI, with a lossless JSON debug
mirror for reviewable fixtures. See docs/gstb_format.md for the byte
layout.

Stroke geometry is quantized to float32 when a stroke is constructed, which
is the precision of the binary stroke section; everything downstream of a
``Stroke`` therefore round-trips bit-exactly. Canvas and placement fields
stay float64 on the wire so gesture composition laws hold at full
precision.
"""

from __future__ import annotations

import dataclasses
import json
import math
import struct
import uuid
from dataclasses import dataclass, field

import numpy as np

from .brush_mesh import BrushParams, DripSeed
from .canvas_registration import CanvasPlane, DrawMode
from .errors import (
    ConflictError,
    CorruptionError,
    DebugJsonError,
    FormatError,
    GestoError,
    ParameterError,
    VersionError,
)
from .geometry import as_quat, as_vec3, quat_is_unit, quat_to_matrix, readonly
from .stroke_pipeline import Centerline, Tool
from . import config

MAGIC = b"GSTB"
FORMAT_VERSION = 1

_TOOL_CODES = {Tool.SPRAY: 0, Tool.DRIP_MOP: 1}
_TOOL_FROM_CODE = {v: k for k, v in _TOOL_CODES.items()}
_MODE_CODES = {DrawMode.CANVAS2D: 0, DrawMode.FREE3D: 1}
_MODE_FROM_CODE = {v: k for k, v in _MODE_CODES.items()}


def _q32(x: float) -> float:
    return float(np.float32(x))


def _q32_arr(a: np.ndarray) -> np.ndarray:
    return a.astype(np.float32).astype(np.float64)


def new_artwork_id() -> str:
    return str(uuid.uuid4())


def derived_artwork_id(material: bytes) -> str:
    """Deterministic id for reproducible packing of the same inputs."""
    return str(uuid.uuid5(uuid.NAMESPACE_URL, "gesto:" + material.hex()))


@dataclass(frozen=True)
class PlacementTransform:
    """Artwork-level rigid placement plus uniform scale.

    World position of a local point x is translation + scale * R(x).
    """

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    scale: float = 1.0

    def __post_init__(self):
        t = readonly(as_vec3(self.translation))
        q = readonly(as_quat(self.rotation))
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "scale", float(self.scale))
        if not np.all(np.isfinite(t)):
            raise ParameterError("placement translation must be finite")
        if not quat_is_unit(q):
            raise ParameterError("placement rotation must be a unit quaternion")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ParameterError(f"placement scale must be positive, got {self.scale}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlacementTransform):
            return NotImplemented
        return (
            np.array_equal(self.translation, other.translation)
            and np.array_equal(self.rotation, other.rotation)
            and self.scale == other.scale
        )

    def __hash__(self):
        return hash((self.translation.tobytes(), self.rotation.tobytes(), self.scale))

    def apply_to_points(self, points: np.ndarray) -> np.ndarray:
        r = quat_to_matrix(self.rotation)
        return (self.scale * points) @ r.T + self.translation[None, :]


@dataclass(frozen=True)
class Stroke:
    """One drawn stroke: centerline, brush, creation mode, and any drips.

    Geometry and brush floats are quantized to float32 on construction to
    match the binary stroke section exactly.
    """

    id: int
    centerline: Centerline
    brush: BrushParams
    mode: DrawMode
    drips: tuple[DripSeed, ...] = ()

    def __post_init__(self):
        if not (0 <= self.id < 2**64):
            raise ParameterError(f"stroke id must fit in 64 bits, got {self.id}")
        line = self.centerline
        object.__setattr__(
            self,
            "centerline",
            Centerline(
                _q32_arr(line.points),
                _q32_arr(line.timestamps),
                line.tool,
                _q32_arr(line.pressure),
            ),
        )
        b = self.brush
        object.__setattr__(
            self,
            "brush",
            BrushParams(
                tool=b.tool,
                base_width=_q32(b.base_width),
                color=tuple(_q32(c) for c in b.color),
                spray_cone_half_angle=_q32(b.spray_cone_half_angle),
                spray_range=_q32(b.spray_range),
                drip_probability=_q32(b.drip_probability),
                drip_max_length=_q32(b.drip_max_length),
            ),
        )
        object.__setattr__(
            self,
            "drips",
            tuple(
                DripSeed(_q32_arr(d.anchor), _q32(d.length), _q32(d.width))
                for d in self.drips
            ),
        )


@dataclass(frozen=True)
class Artwork:
    """Named stroke collection with optional canvas and a placement."""

    artwork_id: str
    author: str
    title: str
    created_at: float
    canvas: CanvasPlane | None = None
    strokes: tuple[Stroke, ...] = ()
    placement: PlacementTransform = field(default_factory=PlacementTransform)

    def __post_init__(self):
        try:
            canonical = str(uuid.UUID(self.artwork_id))
        except (ValueError, AttributeError, TypeError) as exc:
            raise ParameterError(f"artwork_id is not a valid UUID: {self.artwork_id!r}") from exc
        object.__setattr__(self, "artwork_id", canonical)
        object.__setattr__(self, "strokes", tuple(self.strokes))
        object.__setattr__(self, "created_at", float(self.created_at))
        if len(self.author.encode("utf-8")) > config.MAX_AUTHOR_BYTES:
            raise ParameterError(f"author exceeds {config.MAX_AUTHOR_BYTES} bytes")
        if len(self.title.encode("utf-8")) > config.MAX_TITLE_BYTES:
            raise ParameterError(f"title exceeds {config.MAX_TITLE_BYTES} bytes")
        if not (self.created_at >= 0.0 and math.isfinite(self.created_at)):
            raise ParameterError(f"created_at must be a nonnegative time, got {self.created_at}")
        ids = [s.id for s in self.strokes]
        if len(set(ids)) != len(ids):
            raise ParameterError("stroke ids must be unique within an artwork")


def add_stroke(artwork: Artwork, stroke: Stroke) -> Artwork:
    """Append a stroke; duplicate ids are a conflict."""
    if any(s.id == stroke.id for s in artwork.strokes):
        raise ConflictError(f"stroke id {stroke.id} already present")
    return dataclasses.replace(artwork, strokes=artwork.strokes + (stroke,))


def gesture_drag(artwork: Artwork, delta) -> Artwork:
    """Translate the whole artwork by ``delta``; stroke data untouched."""
    d = as_vec3(delta)
    if not np.all(np.isfinite(d)):
        raise ParameterError("drag delta must be finite")
    placement = dataclasses.replace(
        artwork.placement, translation=artwork.placement.translation + d
    )
    return dataclasses.replace(artwork, placement=placement)


def gesture_scale(artwork: Artwork, factor: float, pivot) -> Artwork:
    """Uniformly scale the artwork about a world-space pivot.

    World positions map as p -> pivot + factor * (p - pivot), which folds
    entirely into the placement (pivot is a fixed point).
    """
    if not (factor > 0.0 and math.isfinite(factor)):
        raise ParameterError(f"scale factor must be positive and finite, got {factor}")
    p = as_vec3(pivot)
    old = artwork.placement
    placement = PlacementTransform(
        translation=p + factor * (old.translation - p),
        rotation=old.rotation,
        scale=factor * old.scale,
    )
    return dataclasses.replace(artwork, placement=placement)


# ---------------------------------------------------------------------------
# Binary format ("GSTB", version 1).


class _Writer:
    def __init__(self):
        self.buf = bytearray()

    def raw(self, data: bytes):
        self.buf += data

    def u8(self, v: int):
        self.buf += struct.pack("<B", v)

    def u16(self, v: int):
        self.buf += struct.pack("<H", v)

    def u32(self, v: int):
        self.buf += struct.pack("<I", v)

    def u64(self, v: int):
        self.buf += struct.pack("<Q", v)

    def f64(self, v: float):
        self.buf += struct.pack("<d", v)

    def f32s(self, values):
        self.buf += np.asarray(values, dtype="<f4").tobytes()

    def f64s(self, values):
        self.buf += np.asarray(values, dtype="<f8").tobytes()

    def string(self, s: str):
        data = s.encode("utf-8")
        self.u16(len(data))
        self.raw(data)


def _encode_header(artwork: Artwork) -> bytes:
    w = _Writer()
    w.raw(uuid.UUID(artwork.artwork_id).bytes)
    w.string(artwork.author)
    w.string(artwork.title)
    w.f64(artwork.created_at)
    w.u8(1 if artwork.canvas is not None else 0)
    w.u32(len(artwork.strokes))
    return bytes(w.buf)


def _encode_canvas(canvas: CanvasPlane) -> bytes:
    w = _Writer()
    w.f64s(canvas.normal)
    w.f64(canvas.offset)
    w.f64s(canvas.u_axis)
    w.f64s(canvas.v_axis)
    w.f64s(canvas.bounds)
    w.f64(canvas.fit_rms)
    return bytes(w.buf)


def _encode_strokes(strokes: tuple[Stroke, ...]) -> bytes:
    w = _Writer()
    for s in strokes:
        w.u64(s.id)
        w.u8(_TOOL_CODES[s.centerline.tool])
        w.u8(_MODE_CODES[s.mode])
        b = s.brush
        w.f32s(
            [b.base_width, *b.color, b.spray_cone_half_angle, b.spray_range,
             b.drip_probability, b.drip_max_length]
        )
        line = s.centerline
        w.u32(len(line))
        rows = np.column_stack([line.points, line.timestamps, line.pressure])
        w.f32s(rows)
        w.u32(len(s.drips))
        if s.drips:
            drip_rows = np.array(
                [[*d.anchor, d.length, d.width] for d in s.drips], dtype=np.float64
            )
            w.f32s(drip_rows)
    return bytes(w.buf)


def _encode_placement(p: PlacementTransform) -> bytes:
    w = _Writer()
    w.f64s(p.translation)
    w.f64s(p.rotation)
    w.f64(p.scale)
    return bytes(w.buf)


def encode(artwork: Artwork) -> bytes:
    """Canonical binary encoding; deterministic for equal artworks."""
    w = _Writer()
    w.raw(MAGIC)
    w.u16(FORMAT_VERSION)
    for section in (
        _encode_header(artwork),
        _encode_canvas(artwork.canvas) if artwork.canvas is not None else None,
        _encode_strokes(artwork.strokes),
        _encode_placement(artwork.placement),
    ):
        if section is None:
            continue
        w.u32(len(section))
        w.raw(section)
    return bytes(w.buf)


class _Reader:
    """Bounds-checked cursor over a byte window; offsets in errors are
    absolute within the full payload."""

    def __init__(self, data: bytes, start: int, end: int):
        self.data = data
        self.pos = start
        self.end = end

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > self.end:
            raise CorruptionError(f"truncated {what}", offset=self.end)
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u16(self, what: str) -> int:
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]

    def f64(self, what: str) -> float:
        return struct.unpack("<d", self.take(8, what))[0]

    def f32_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(4 * count, what)
        # arbitrary bit patterns may hold signaling NaNs; the cast is fine,
        # validation happens when the values are used
        with np.errstate(invalid="ignore"):
            return np.frombuffer(raw, dtype="<f4").astype(np.float64)

    def f64_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)

    def string(self, what: str) -> str:
        n = self.u16(what + " length")
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{what} is not valid UTF-8: {exc}") from exc

    def section(self, what: str) -> "_Reader":
        n = self.u32(what + " section length")
        if self.pos + n > self.end:
            raise CorruptionError(f"truncated {what} section", offset=self.end)
        sub = _Reader(self.data, self.pos, self.pos + n)
        self.pos += n
        return sub

    def expect_exhausted(self, what: str):
        if self.pos != self.end:
            raise CorruptionError(f"{what} has {self.end - self.pos} stray bytes", offset=self.pos)


def _decode_stroke(r: _Reader) -> Stroke:
    sid = r.u64("stroke id")
    tool_code = r.u8("stroke tool")
    if tool_code not in _TOOL_FROM_CODE:
        raise FormatError(f"unknown tool code {tool_code}")
    mode_code = r.u8("stroke mode")
    if mode_code not in _MODE_FROM_CODE:
        raise FormatError(f"unknown mode code {mode_code}")
    brush_vals = r.f32_array(9, "brush parameters")
    brush = BrushParams(
        tool=_TOOL_FROM_CODE[tool_code],
        base_width=float(brush_vals[0]),
        color=tuple(float(c) for c in brush_vals[1:5]),
        spray_cone_half_angle=float(brush_vals[5]),
        spray_range=float(brush_vals[6]),
        drip_probability=float(brush_vals[7]),
        drip_max_length=float(brush_vals[8]),
    )
    n_points = r.u32("point count")
    if n_points == 0:
        raise FormatError("stroke centerline is empty")
    if r.pos + 20 * n_points > r.end:
        raise CorruptionError(f"point count {n_points} exceeds section", offset=r.pos)
    rows = r.f32_array(5 * n_points, "centerline points").reshape(n_points, 5)
    line = Centerline(rows[:, :3], rows[:, 3], _TOOL_FROM_CODE[tool_code], rows[:, 4])
    n_drips = r.u32("drip count")
    if r.pos + 20 * n_drips > r.end:
        raise CorruptionError(f"drip count {n_drips} exceeds section", offset=r.pos)
    drips = []
    if n_drips:
        drip_rows = r.f32_array(5 * n_drips, "drip seeds").reshape(n_drips, 5)
        drips = [DripSeed(row[:3], float(row[3]), float(row[4])) for row in drip_rows]
    return Stroke(
        id=sid, centerline=line, brush=brush,
        mode=_MODE_FROM_CODE[mode_code], drips=tuple(drips),
    )


def decode(data: bytes) -> Artwork:
    """Decode a GSTB payload; any malformed input raises a FormatError
    subtype and never anything else."""
    try:
        return _decode_inner(data)
    except FormatError:
        raise
    except (GestoError, ValueError, TypeError, OverflowError, struct.error) as exc:
        raise FormatError(f"invalid artwork payload: {exc}") from exc


def _decode_inner(data: bytes) -> Artwork:
    if len(data) < 4:
        raise CorruptionError("truncated magic", offset=len(data))
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}")
    r = _Reader(data, 4, len(data))
    version = r.u16("format version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format version {version}")

    header = r.section("header")
    art_id = str(uuid.UUID(bytes=header.take(16, "artwork id")))
    author = header.string("author")
    title = header.string("title")
    created_at = header.f64("created_at")
    has_canvas = header.u8("canvas flag")
    if has_canvas not in (0, 1):
        raise FormatError(f"canvas flag must be 0 or 1, got {has_canvas}")
    stroke_count = header.u32("stroke count")
    header.expect_exhausted("header")

    canvas = None
    if has_canvas:
        c = r.section("canvas")
        normal = c.f64_array(3, "canvas normal")
        offset = c.f64("canvas offset")
        u_axis = c.f64_array(3, "canvas u axis")
        v_axis = c.f64_array(3, "canvas v axis")
        bounds = tuple(c.f64_array(4, "canvas bounds"))
        fit_rms = c.f64("canvas fit rms")
        c.expect_exhausted("canvas")
        canvas = CanvasPlane(normal, offset, u_axis, v_axis, bounds, fit_rms)

    s = r.section("strokes")
    if stroke_count > (s.end - s.pos) // 14:  # 14 bytes is the minimum stroke size prefix
        raise CorruptionError(f"stroke count {stroke_count} exceeds section", offset=s.pos)
    strokes = tuple(_decode_stroke(s) for _ in range(stroke_count))
    s.expect_exhausted("strokes")

    p = r.section("placement")
    translation = p.f64_array(3, "placement translation")
    rotation = p.f64_array(4, "placement rotation")
    scale = p.f64("placement scale")
    p.expect_exhausted("placement")
    placement = PlacementTransform(translation, rotation, scale)

    r.expect_exhausted("payload")
    return Artwork(
        artwork_id=art_id, author=author, title=title, created_at=created_at,
        canvas=canvas, strokes=strokes, placement=placement,
    )


# ---------------------------------------------------------------------------
# Debug text mirror: a lossless JSON rendering of the binary document.


def to_debug_json(artwork: Artwork) -> str:
    doc = {
        "format": "gstb",
        "version": FORMAT_VERSION,
        "artwork_id": artwork.artwork_id,
        "author": artwork.author,
        "title": artwork.title,
        "created_at": artwork.created_at,
        "canvas": None
        if artwork.canvas is None
        else {
            "normal": artwork.canvas.normal.tolist(),
            "offset": artwork.canvas.offset,
            "u_axis": artwork.canvas.u_axis.tolist(),
            "v_axis": artwork.canvas.v_axis.tolist(),
            "bounds": list(artwork.canvas.bounds),
            "fit_rms": artwork.canvas.fit_rms,
        },
        "strokes": [
            {
                "id": s.id,
                "tool": s.centerline.tool.value,
                "mode": s.mode.value,
                "brush": {
                    "base_width": s.brush.base_width,
                    "color": list(s.brush.color),
                    "spray_cone_half_angle": s.brush.spray_cone_half_angle,
                    "spray_range": s.brush.spray_range,
                    "drip_probability": s.brush.drip_probability,
                    "drip_max_length": s.brush.drip_max_length,
                },
                "points": s.centerline.points.tolist(),
                "timestamps": s.centerline.timestamps.tolist(),
                "pressure": s.centerline.pressure.tolist(),
                "drips": [
                    {"anchor": d.anchor.tolist(), "length": d.length, "width": d.width}
                    for d in s.drips
                ],
            }
            for s in artwork.strokes
        ],
        "placement": {
            "translation": artwork.placement.translation.tolist(),
            "rotation": artwork.placement.rotation.tolist(),
            "scale": artwork.placement.scale,
        },
    }
    return json.dumps(doc, indent=2)


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise DebugJsonError(f"missing required field {key!r} in {where}")
    return obj[key]


def from_debug_json(text: str) -> Artwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DebugJsonError(exc.msg, line=exc.lineno, col=exc.colno) from exc
    if not isinstance(doc, dict):
        raise DebugJsonError("top-level value must be an object")
    try:
        version = _require(doc, "version", "document")
        if version != FORMAT_VERSION:
            raise VersionError(f"unsupported format version {version}")
        canvas_doc = _require(doc, "canvas", "document")
        canvas = None
        if canvas_doc is not None:
            canvas = CanvasPlane(
                _require(canvas_doc, "normal", "canvas"),
                _require(canvas_doc, "offset", "canvas"),
                _require(canvas_doc, "u_axis", "canvas"),
                _require(canvas_doc, "v_axis", "canvas"),
                tuple(_require(canvas_doc, "bounds", "canvas")),
                _require(canvas_doc, "fit_rms", "canvas"),
            )
        strokes = []
        for i, sdoc in enumerate(_require(doc, "strokes", "document")):
            where = f"strokes[{i}]"
            bdoc = _require(sdoc, "brush", where)
            tool = Tool(_require(sdoc, "tool", where))
            brush = BrushParams(
                tool=tool,
                base_width=_require(bdoc, "base_width", where),
                color=tuple(_require(bdoc, "color", where)),
                spray_cone_half_angle=_require(bdoc, "spray_cone_half_angle", where),
                spray_range=_require(bdoc, "spray_range", where),
                drip_probability=_require(bdoc, "drip_probability", where),
                drip_max_length=_require(bdoc, "drip_max_length", where),
            )
            line = Centerline(
                _require(sdoc, "points", where),
                _require(sdoc, "timestamps", where),
                tool,
                _require(sdoc, "pressure", where),
            )
            drips = tuple(
                DripSeed(
                    _require(ddoc, "anchor", where),
                    _require(ddoc, "length", where),
                    _require(ddoc, "width", where),
                )
                for ddoc in sdoc.get("drips", [])
            )
            strokes.append(
                Stroke(
                    id=_require(sdoc, "id", where),
                    centerline=line,
                    brush=brush,
                    mode=DrawMode(_require(sdoc, "mode", where)),
                    drips=drips,
                )
            )
        pdoc = _require(doc, "placement", "document")
        placement = PlacementTransform(
            _require(pdoc, "translation", "placement"),
            _require(pdoc, "rotation", "placement"),
            _require(pdoc, "scale", "placement"),
        )
        return Artwork(
            artwork_id=_require(doc, "artwork_id", "document"),
            author=_require(doc, "author", "document"),
            title=_require(doc, "title", "document"),
            created_at=_require(doc, "created_at", "document"),
            canvas=canvas,
            strokes=tuple(strokes),
            placement=placement,
        )
    except FormatError:
        raise
    except (GestoError, ValueError, TypeError) as exc:
        raise DebugJsonError(f"invalid document: {exc}") from exc
