"""Pose stream to clean stroke centerlines.

A recorded 6-DoF device stream becomes strokes in three steps: the virtual
nib transform maps each pose to a world-space paint point, maximal runs of
held-button samples become raw centerlines, and arc-length resampling plus
moving-average smoothing turn those into evenly spaced, low-noise polylines
ready for tessellation.

Everything here is a pure function of its inputs; all values are immutable
after construction.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from . import config
from .errors import InvalidPoseError, ParameterError, PoseLogError
from .geometry import as_quat, as_vec3, quat_is_unit, quat_rotate, readonly

# Arc positions closer than this count as coincident when deciding whether
# the final endpoint needs its own resampled point, meters.
_COINCIDENT_TOL = 1e-9


class Tool(enum.Enum):
    """The two brush modes: a pressurized spray and a dripping mop marker."""

    SPRAY = "spray"
    DRIP_MOP = "drip"


@dataclass(frozen=True, eq=False)
class PoseSample:
    """One timestamped rigid pose of the handheld device.

    ``t`` is seconds since session start, ``position`` meters in the world
    frame, ``orientation`` a unit (w,x,y,z) quaternion, ``pressed`` whether
    the draw button is held, ``tool`` the active brush mode.
    """

    t: float
    position: np.ndarray
    orientation: np.ndarray
    pressed: bool
    tool: Tool

    def __post_init__(self):
        p = readonly(as_vec3(self.position))
        q = readonly(as_quat(self.orientation))
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", q)
        if not math.isfinite(self.t):
            raise InvalidPoseError(f"non-finite timestamp {self.t}")
        if not np.all(np.isfinite(p)):
            raise InvalidPoseError(f"non-finite position {p.tolist()}")
        if not np.all(np.isfinite(q)) or not quat_is_unit(q):
            raise InvalidPoseError(f"orientation {q.tolist()} is not unit norm")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PoseSample):
            return NotImplemented
        return (
            self.t == other.t
            and self.pressed == other.pressed
            and self.tool == other.tool
            and np.array_equal(self.position, other.position)
            and np.array_equal(self.orientation, other.orientation)
        )

    def __hash__(self):
        return hash((self.t, self.pressed, self.tool,
                     self.position.tobytes(), self.orientation.tobytes()))


@dataclass(frozen=True, eq=False)
class NibOffset:
    """Device-local offset of the virtual nib, the point that emits paint."""

    offset: np.ndarray = field(default_factory=lambda: np.array(config.DEFAULT_NIB_OFFSET))

    def __post_init__(self):
        v = readonly(as_vec3(self.offset))
        object.__setattr__(self, "offset", v)
        if not np.all(np.isfinite(v)):
            raise ParameterError("nib offset must be finite")
        if float(np.linalg.norm(v)) > config.MAX_NIB_OFFSET:
            raise ParameterError(
                f"nib offset magnitude {np.linalg.norm(v):.3f} m exceeds "
                f"{config.MAX_NIB_OFFSET} m"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, NibOffset):
            return NotImplemented
        return np.array_equal(self.offset, other.offset)

    def __hash__(self):
        return hash(self.offset.tobytes())


class Centerline:
    """Ordered stroke path: points (N,3), timestamps (N,), per-point pressure
    in [0,1], and the tool that drew it. Immutable."""

    __slots__ = ("points", "timestamps", "pressure", "tool")

    def __init__(self, points, timestamps, tool: Tool, pressure=None):
        pts = readonly(np.asarray(points, dtype=np.float64).reshape(-1, 3))
        ts = readonly(np.asarray(timestamps, dtype=np.float64).reshape(-1))
        if pressure is None:
            pressure = np.ones(len(ts))
        pr = readonly(np.asarray(pressure, dtype=np.float64).reshape(-1))
        if len(pts) == 0:
            raise ParameterError("a centerline needs at least one point")
        if not (len(pts) == len(ts) == len(pr)):
            raise ParameterError(
                f"mismatched lengths: {len(pts)} points, {len(ts)} timestamps, "
                f"{len(pr)} pressure values"
            )
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(ts)):
            raise ParameterError("centerline contains non-finite values")
        if not np.all(np.isfinite(pr)) or np.any(pr < 0.0) or np.any(pr > 1.0):
            raise ParameterError("pressure values must be finite and in [0, 1]")
        self.points = pts
        self.timestamps = ts
        self.pressure = pr
        self.tool = tool

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Centerline):
            return NotImplemented
        return (
            self.tool == other.tool
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.pressure, other.pressure)
        )

    def __hash__(self):
        return hash((self.tool, self.points.tobytes(), self.timestamps.tobytes()))

    def __repr__(self):
        return f"Centerline({len(self)} points, tool={self.tool.value})"

    def with_points(self, points) -> "Centerline":
        return Centerline(points, self.timestamps, self.tool, self.pressure)

    def with_pressure(self, pressure) -> "Centerline":
        return Centerline(self.points, self.timestamps, self.tool, pressure)

    def arc_length(self) -> float:
        if len(self) < 2:
            return 0.0
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


def nib_position(pose: PoseSample, offset: NibOffset) -> np.ndarray:
    """World position of the virtual nib for one pose.

    The nib rides at a fixed device-local offset, so its world position is
    the pose translation plus the rotated offset.
    """
    if not quat_is_unit(pose.orientation):
        raise InvalidPoseError("pose orientation is not unit norm")
    return pose.position + quat_rotate(pose.orientation, offset.offset)


def segment_strokes(stream: list[PoseSample], offset: NibOffset) -> list[Centerline]:
    """Split a pose stream into one raw centerline per held-button run.

    A run is a maximal stretch of consecutive ``pressed`` samples with a
    single tool; switching tools mid-press starts a new centerline so each
    stroke maps to exactly one tool. Pressure starts at 1 everywhere and is
    refined later by the spray distance model.
    """
    for prev, cur in zip(stream, stream[1:]):
        if cur.t <= prev.t:
            raise InvalidPoseError(
                f"timestamps must be strictly increasing ({prev.t} -> {cur.t})"
            )
    lines: list[Centerline] = []
    run_pts: list[np.ndarray] = []
    run_ts: list[float] = []
    run_tool: Tool | None = None

    def flush():
        nonlocal run_pts, run_ts, run_tool
        if run_pts:
            lines.append(Centerline(np.array(run_pts), np.array(run_ts), run_tool))
        run_pts, run_ts, run_tool = [], [], None

    for sample in stream:
        if not sample.pressed:
            flush()
            continue
        if run_tool is not None and sample.tool != run_tool:
            flush()
        if run_tool is None:
            run_tool = sample.tool
        run_pts.append(nib_position(sample, offset))
        run_ts.append(sample.t)
    flush()
    return lines


def resample(line: Centerline, min_spacing: float) -> Centerline:
    """Resample a centerline at uniform arc-length spacing.

    The first and last input points are kept exactly. Interior points sit at
    arc positions k*min_spacing along the input polyline; the exact endpoint
    is appended when the last uniform sample does not already land on it.
    Timestamps and pressure are interpolated linearly in arc length. Input
    whose total arc length is zero collapses to a single point.
    """
    if not (min_spacing > 0.0) or not math.isfinite(min_spacing):
        raise ParameterError(f"min_spacing must be positive, got {min_spacing}")

    pts = line.points
    # Exact duplicate neighbors would break interpolation; drop them.
    if len(pts) > 1:
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        keep = np.concatenate([[True], seg > 0.0])
        pts = pts[keep]
        ts = line.timestamps[keep]
        pr = line.pressure[keep]
    else:
        ts = line.timestamps
        pr = line.pressure

    if len(pts) < 2:
        return Centerline(pts[:1], ts[:1], line.tool, pr[:1])

    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    arc = float(cum[-1])
    if arc <= _COINCIDENT_TOL:
        return Centerline(pts[:1], ts[:1], line.tool, pr[:1])

    n_steps = int(math.floor(arc / min_spacing + 1e-9))
    targets = min_spacing * np.arange(n_steps + 1, dtype=np.float64)
    out_pts = np.column_stack([np.interp(targets, cum, pts[:, i]) for i in range(3)])
    out_ts = np.interp(targets, cum, ts)
    out_pr = np.interp(targets, cum, pr)

    out_pts[0] = pts[0]
    if arc - targets[-1] > _COINCIDENT_TOL:
        out_pts = np.vstack([out_pts, pts[-1]])
        out_ts = np.append(out_ts, ts[-1])
        out_pr = np.append(out_pr, pr[-1])
    else:
        out_pts[-1] = pts[-1]
        out_ts[-1] = ts[-1]
        out_pr[-1] = pr[-1]
    return Centerline(out_pts, out_ts, line.tool, out_pr)


def smooth(line: Centerline, window: int) -> Centerline:
    """Centered moving average over positions.

    The window shrinks symmetrically near the ends, which keeps the first
    and last points exact and makes the filter an identity on collinear,
    equally spaced input. Timestamps, pressure, and tool pass through.
    """
    if window < 1 or window % 2 == 0:
        raise ParameterError(f"window must be a positive odd integer, got {window}")
    n = len(line)
    if window == 1 or n <= 2:
        return line
    half = window // 2
    pts = line.points
    out = pts.copy()
    for i in range(1, n - 1):
        reach = min(half, i, n - 1 - i)
        out[i] = pts[i - reach : i + reach + 1].mean(axis=0)
    return line.with_points(out)


# ---------------------------------------------------------------------------
# Pose-log format: JSON Lines, one object per sample with fields
#   t (seconds), p ([x,y,z] meters), q ([w,x,y,z]), pressed (bool),
#   tool ("spray" | "drip").


def parse_pose_log(lines: Iterable[str]) -> list[PoseSample]:
    """Parse pose-log lines; raises PoseLogError naming the bad line."""
    samples: list[PoseSample] = []
    last_t = None
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise PoseLogError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        if not isinstance(obj, dict):
            raise PoseLogError("expected a JSON object", line=lineno)
        try:
            t = float(obj["t"])
            p = [float(x) for x in obj["p"]]
            q = [float(x) for x in obj["q"]]
            pressed = bool(obj["pressed"])
            tool = Tool(obj["tool"])
        except KeyError as exc:
            raise PoseLogError(f"missing field {exc.args[0]!r}", line=lineno) from exc
        except (TypeError, ValueError) as exc:
            raise PoseLogError(f"bad field value: {exc}", line=lineno) from exc
        if len(p) != 3 or len(q) != 4:
            raise PoseLogError("p must have 3 elements and q 4", line=lineno)
        try:
            sample = PoseSample(t=t, position=p, orientation=q, pressed=pressed, tool=tool)
        except InvalidPoseError as exc:
            raise PoseLogError(str(exc), line=lineno) from exc
        if last_t is not None and t <= last_t:
            raise PoseLogError(
                f"timestamp {t} does not increase past {last_t}", line=lineno
            )
        last_t = t
        samples.append(sample)
    return samples


def read_pose_log(path) -> list[PoseSample]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_pose_log(fh)


def format_pose_log(samples: Iterable[PoseSample]) -> str:
    """Serialize samples back to the JSONL wire form (LF line endings)."""
    out = []
    for s in samples:
        out.append(
            json.dumps(
                {
                    "t": s.t,
                    "p": s.position.tolist(),
                    "q": s.orientation.tolist(),
                    "pressed": s.pressed,
                    "tool": s.tool.value,
                }
            )
        )
    return "\n".join(out) + ("\n" if out else "")


def write_pose_log(samples: Iterable[PoseSample], path, fh: IO[str] | None = None) -> None:
    text = format_pose_log(samples)
    if fh is not None:
        fh.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(text)
