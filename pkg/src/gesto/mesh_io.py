"""Mesh export: Wavefront OBJ text and binary glTF 2.0 (.glb).

Both writers are deterministic: the same mesh always produces the same
bytes. OBJ is plain v/vn/f; per-vertex RGBA colors ride in a comment block
(``#vc r g b a``, one line per vertex in v-line order) so strict parsers
skip them. GLB carries POSITION, NORMAL, and COLOR_0 float accessors plus
32-bit indices, all little-endian.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .brush_mesh import TriangleMesh
from .errors import ParameterError

_GLB_MAGIC = 0x46546C67
_CHUNK_JSON = 0x4E4F534A
_CHUNK_BIN = 0x004E4942

_FLOAT32 = 5126
_UINT32 = 5125
_ARRAY_BUFFER = 34962
_ELEMENT_ARRAY_BUFFER = 34963


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest round-trip decimal
    return repr(float(x))


def _fmt_row(row) -> str:
    return " ".join(_fmt(x) for x in row)


def obj_text(mesh: TriangleMesh) -> str:
    lines = [
        "# triangle mesh export",
        f"# vertices {mesh.vertex_count} triangles {mesh.triangle_count}",
    ]
    for v in mesh.vertices:
        lines.append("v " + _fmt_row(v))
    for n in mesh.normals:
        lines.append("vn " + _fmt_row(n))
    if mesh.vertex_count:
        lines.append("# vertex colors, RGBA per vertex in v-line order")
        for c in mesh.colors:
            lines.append("#vc " + _fmt_row(c))
    tris = mesh.indices.reshape(-1, 3)
    for a, b, c in tris:
        lines.append(f"f {a + 1}//{a + 1} {b + 1}//{b + 1} {c + 1}//{c + 1}")
    return "\n".join(lines) + "\n"


def write_obj(mesh: TriangleMesh, path) -> None:
    Path(path).write_text(obj_text(mesh), encoding="utf-8", newline="\n")


def _accessor_bounds(values: np.ndarray) -> tuple[list[float], list[float]]:
    return (
        [float(x) for x in values.min(axis=0)],
        [float(x) for x in values.max(axis=0)],
    )


def glb_bytes(mesh: TriangleMesh) -> bytes:
    if mesh.vertex_count == 0:
        doc = {"asset": {"generator": "gesto", "version": "2.0"}, "scene": 0, "scenes": [{}]}
        return _pack_glb(doc, None)

    positions = mesh.vertices.astype("<f4")
    normals = mesh.normals.astype("<f4")
    colors = mesh.colors.astype("<f4")
    indices = mesh.indices.astype("<u4")
    blobs = [positions.tobytes(), normals.tobytes(), colors.tobytes(), indices.tobytes()]

    views = []
    offset = 0
    for blob, target in zip(blobs, (_ARRAY_BUFFER, _ARRAY_BUFFER, _ARRAY_BUFFER,
                                    _ELEMENT_ARRAY_BUFFER)):
        views.append(
            {"buffer": 0, "byteLength": len(blob), "byteOffset": offset, "target": target}
        )
        offset += len(blob)  # all element sizes are multiples of 4, no padding needed
    binary = b"".join(blobs)

    pos_min, pos_max = _accessor_bounds(positions.astype(np.float64))
    doc = {
        "asset": {"generator": "gesto", "version": "2.0"},
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": [{"mesh": 0}],
        "meshes": [
            {
                "primitives": [
                    {
                        "attributes": {"COLOR_0": 2, "NORMAL": 1, "POSITION": 0},
                        "indices": 3,
                        "mode": 4,
                    }
                ]
            }
        ],
        "accessors": [
            {
                "bufferView": 0,
                "componentType": _FLOAT32,
                "count": mesh.vertex_count,
                "max": pos_max,
                "min": pos_min,
                "type": "VEC3",
            },
            {"bufferView": 1, "componentType": _FLOAT32, "count": mesh.vertex_count,
             "type": "VEC3"},
            {"bufferView": 2, "componentType": _FLOAT32, "count": mesh.vertex_count,
             "type": "VEC4"},
            {"bufferView": 3, "componentType": _UINT32, "count": mesh.triangle_count * 3,
             "type": "SCALAR"},
        ],
        "bufferViews": views,
        "buffers": [{"byteLength": len(binary)}],
    }
    return _pack_glb(doc, binary)


def _pack_glb(doc: dict, binary: bytes | None) -> bytes:
    payload = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload += b" " * (-len(payload) % 4)
    chunks = struct.pack("<II", len(payload), _CHUNK_JSON) + payload
    if binary is not None:
        binary = binary + b"\x00" * (-len(binary) % 4)
        chunks += struct.pack("<II", len(binary), _CHUNK_BIN) + binary
    header = struct.pack("<III", _GLB_MAGIC, 2, 12 + len(chunks))
    return header + chunks


def write_glb(mesh: TriangleMesh, path) -> None:
    Path(path).write_bytes(glb_bytes(mesh))


def write_mesh(mesh: TriangleMesh, path) -> None:
    """Write by extension: .obj or .glb."""
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        write_obj(mesh, path)
    elif suffix == ".glb":
        write_glb(mesh, path)
    else:
        raise ParameterError(f"unsupported mesh format {suffix!r} (use .obj or .glb)")
