"""gesto: a device-independent engine for embodied graffiti drawing.

Pose streams from a handheld device become spray and drip-mop strokes,
strokes become triangle meshes, and finished artworks persist as versioned
binary documents over HTTP. The package splits into pure pipeline modules
(stroke_pipeline, canvas_registration, brush_mesh, artwork_model, engine),
exporters (mesh_io), and the service/CLI front ends (service, cli).
"""

from .artwork_model import (
    Artwork,
    PlacementTransform,
    Stroke,
    add_stroke,
    decode,
    encode,
    from_debug_json,
    gesture_drag,
    gesture_scale,
    new_artwork_id,
    to_debug_json,
)
from .brush_mesh import (
    BrushParams,
    DripSeed,
    SprayFootprint,
    TriangleMesh,
    drip_simulate,
    merge_meshes,
    spray_footprint,
    tessellate_ribbon,
    tessellate_tube,
)
from .canvas_registration import (
    CanvasPlane,
    DrawMode,
    constrain_stroke,
    fit_plane,
    project_to_canvas,
)
from .engine import ReplaySettings, artwork_mesh, pack_artwork, replay
from .errors import (
    ConflictError,
    CorruptionError,
    DebugJsonError,
    DegenerateScanError,
    FormatError,
    GestoError,
    InvalidInputError,
    InvalidPoseError,
    ModeError,
    NoisyScanError,
    ParameterError,
    PoseLogError,
    VersionError,
)
from .stroke_pipeline import (
    Centerline,
    NibOffset,
    PoseSample,
    Tool,
    nib_position,
    read_pose_log,
    resample,
    segment_strokes,
    smooth,
    write_pose_log,
)

__version__ = "0.1.0"

__all__ = [
    "Artwork",
    "BrushParams",
    "CanvasPlane",
    "Centerline",
    "ConflictError",
    "CorruptionError",
    "DebugJsonError",
    "DegenerateScanError",
    "DrawMode",
    "DripSeed",
    "FormatError",
    "GestoError",
    "InvalidInputError",
    "InvalidPoseError",
    "ModeError",
    "NibOffset",
    "NoisyScanError",
    "ParameterError",
    "PlacementTransform",
    "PoseLogError",
    "PoseSample",
    "ReplaySettings",
    "SprayFootprint",
    "Stroke",
    "Tool",
    "TriangleMesh",
    "VersionError",
    "add_stroke",
    "artwork_mesh",
    "constrain_stroke",
    "decode",
    "drip_simulate",
    "encode",
    "fit_plane",
    "from_debug_json",
    "gesture_drag",
    "gesture_scale",
    "merge_meshes",
    "new_artwork_id",
    "nib_position",
    "pack_artwork",
    "project_to_canvas",
    "read_pose_log",
    "replay",
    "resample",
    "segment_strokes",
    "smooth",
    "spray_footprint",
    "tessellate_ribbon",
    "tessellate_tube",
    "to_debug_json",
    "write_pose_log",
]
