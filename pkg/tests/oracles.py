"""Independent reference implementations used to cross-check the engine.

Everything here is written directly from the documented contracts in plain
Python, sharing no code with the package, so an engine bug cannot hide
inside its own test oracle. Keep it that way: no imports from gesto.
"""

from __future__ import annotations

import json
import math
import struct

import numpy as np

_U64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    # splitmix64 finalizer, written out step by step
    x = (x + 0x9E3779B97F4A7C15) & _U64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
    return z ^ (z >> 31)


def ref_u64_stream(seed: int):
    """Generator of the xorshift64* sequence for a seed, per the documented
    recipe: state = splitmix64(seed) (gamma constant if zero), then
    shifts 12/25/27 and the 0x2545F4914F6CDD1D output multiply."""
    state = _mix64(seed & _U64)
    if state == 0:
        state = 0x9E3779B97F4A7C15
    while True:
        state ^= state >> 12
        state = (state ^ (state << 25)) & _U64
        state ^= state >> 27
        yield (state * 0x2545F4914F6CDD1D) & _U64


class RefRng:
    """Float view over ref_u64_stream: (u64 >> 11) * 2^-53."""

    def __init__(self, seed: int):
        self._stream = ref_u64_stream(seed)

    def next_float(self) -> float:
        return (next(self._stream) >> 11) * 2.0 ** -53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()


def ref_drip_decisions(seed: int, n_candidates: int, probability: float,
                       lo: float, hi: float) -> list[float | None]:
    """Accept/length decision per candidate: one float draw per candidate,
    one more per acceptance."""
    rng = RefRng(seed)
    out: list[float | None] = []
    for _ in range(n_candidates):
        if rng.next_float() < probability:
            out.append(rng.uniform(lo, hi))
        else:
            out.append(None)
    return out


# ---------------------------------------------------------------------------
# Polyline references.


def ref_resample(points, spacing: float):
    """Arc-length walk emitting points at multiples of ``spacing``; both
    endpoints exact, final endpoint appended unless the walk lands on it."""
    pts = [list(map(float, p)) for p in points]
    # drop exact duplicate neighbors
    dedup = [pts[0]]
    for p in pts[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    pts = dedup
    if len(pts) < 2:
        return [pts[0]]

    def dist(a, b):
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))

    total = sum(dist(a, b) for a, b in zip(pts, pts[1:]))
    if total <= 1e-9:
        return [pts[0]]

    out = [list(pts[0])]
    target = spacing
    walked = 0.0
    seg = 0
    while target <= total + 1e-9 * spacing:
        # advance to the segment containing the target arc position
        while seg < len(pts) - 2 and walked + dist(pts[seg], pts[seg + 1]) < target:
            walked += dist(pts[seg], pts[seg + 1])
            seg += 1
        seg_len = dist(pts[seg], pts[seg + 1])
        f = min((target - walked) / seg_len, 1.0)
        out.append([a + f * (b - a) for a, b in zip(pts[seg], pts[seg + 1])])
        target += spacing
    if dist(out[-1], pts[-1]) > 1e-9:
        out.append(list(pts[-1]))
    else:
        out[-1] = list(pts[-1])
    return out


def ref_moving_average(points, window: int):
    """Centered moving average with the reach clamped symmetrically to the
    nearer end; endpoints untouched."""
    pts = [list(map(float, p)) for p in points]
    n = len(pts)
    half = window // 2
    out = [list(p) for p in pts]
    for i in range(1, n - 1):
        reach = min(half, i, n - 1 - i)
        acc = [0.0, 0.0, 0.0]
        for j in range(i - reach, i + reach + 1):
            for k in range(3):
                acc[k] += pts[j][k]
        out[i] = [a / (2 * reach + 1) for a in acc]
    return out


# ---------------------------------------------------------------------------
# Plane references (covariance + eigendecomposition route).


def ref_fit_plane(samples):
    """Total-least-squares plane: eigenvector of the covariance matrix with
    the smallest eigenvalue. Returns (normal, offset, rms); normal sign is
    arbitrary."""
    pts = np.asarray(samples, dtype=np.float64)
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered / len(pts)
    evals, evecs = np.linalg.eigh(cov)
    normal = evecs[:, 0]
    offset = float(normal @ centroid)
    rms = math.sqrt(float(np.mean((pts @ normal - offset) ** 2)))
    return normal, offset, rms


def ref_plane_rms(samples, normal) -> float:
    """RMS point-plane distance for a given unit normal at its own best
    offset (the mean projection)."""
    pts = np.asarray(samples, dtype=np.float64)
    n = np.asarray(normal, dtype=np.float64)
    n = n / np.linalg.norm(n)
    d = pts @ n
    return math.sqrt(float(np.mean((d - d.mean()) ** 2)))


# ---------------------------------------------------------------------------
# Export format parsers.


def parse_obj(text: str):
    """Minimal Wavefront OBJ reader: v/vn/f plus the #vc color comments."""
    vertices, normals, colors, faces = [], [], [], []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#vc "):
            colors.append([float(x) for x in line.split()[1:]])
            continue
        if not line or line.startswith("#"):
            continue
        head, *rest = line.split()
        if head == "v":
            vertices.append([float(x) for x in rest])
        elif head == "vn":
            normals.append([float(x) for x in rest])
        elif head == "f":
            face = []
            for part in rest:
                face.append(int(part.split("/")[0]) - 1)
            faces.append(face)
    return {"vertices": vertices, "normals": normals, "colors": colors, "faces": faces}


def parse_glb(data: bytes):
    """Split a .glb container into its JSON document and binary blob,
    checking the container framing as we go."""
    magic, version, total = struct.unpack_from("<III", data, 0)
    assert magic == 0x46546C67, "not a glb container"
    assert version == 2
    assert total == len(data)
    offset = 12
    doc = None
    blob = None
    while offset < len(data):
        length, kind = struct.unpack_from("<II", data, offset)
        offset += 8
        chunk = data[offset : offset + length]
        offset += length
        if kind == 0x4E4F534A:
            doc = json.loads(chunk.decode("utf-8"))
        elif kind == 0x004E4942:
            blob = chunk
    return doc, blob


def glb_accessor_array(doc: dict, blob: bytes, index: int) -> np.ndarray:
    """Pull one accessor out of the binary blob by walking the bufferView
    indirection by hand."""
    acc = doc["accessors"][index]
    view = doc["bufferViews"][acc["bufferView"]]
    comp = {5126: ("<f4", 4), 5125: ("<u4", 4)}[acc["componentType"]]
    width = {"SCALAR": 1, "VEC3": 3, "VEC4": 4}[acc["type"]]
    start = view.get("byteOffset", 0)
    raw = blob[start : start + acc["count"] * width * comp[1]]
    arr = np.frombuffer(raw, dtype=comp[0])
    return arr.reshape(acc["count"], width) if width > 1 else arr
