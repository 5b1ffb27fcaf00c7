"""Shared builders and fixtures for the test suite."""

from __future__ import annotations

import math
import random
import threading
import time
from pathlib import Path

import numpy as np
import pytest
import uvicorn

from gesto.artwork_model import Artwork, PlacementTransform, Stroke
from gesto.brush_mesh import BrushParams, DripSeed
from gesto.canvas_registration import CanvasPlane, DrawMode, fit_plane
from gesto.service import create_app
from gesto.stroke_pipeline import Centerline, PoseSample, Tool

FIXTURES = Path(__file__).parent / "fixtures"


def pose(t, p, q=(1.0, 0.0, 0.0, 0.0), pressed=True, tool=Tool.SPRAY) -> PoseSample:
    return PoseSample(t=t, position=p, orientation=q, pressed=pressed, tool=tool)


def straight_stream(n=11, step=0.1, y=0.0, z=0.0, tool=Tool.SPRAY, pressed=True):
    """n samples walking +x at fixed height/depth, identity orientation."""
    return [pose(i * 0.1, (i * step, y, z), pressed=pressed, tool=tool) for i in range(n)]


def plane_z0() -> CanvasPlane:
    """The z = 0 wall, normal +z (toward a viewer at positive z)."""
    corners = [(0, 0, 0), (2, 0, 0), (0, 2, 0), (2, 2, 0)]
    return fit_plane(corners, max_rms=0.01, view_dir=(0, 0, -1))


def plane_horizontal() -> CanvasPlane:
    """The y = 0 floor, normal straight up: gravity has no in-plane part."""
    corners = [(0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)]
    return fit_plane(corners, max_rms=0.01)


def random_unit_quat(rnd: random.Random):
    while True:
        q = np.array([rnd.gauss(0, 1) for _ in range(4)])
        norm = np.linalg.norm(q)
        if norm > 1e-3:
            return q / norm


def random_plane(rnd: random.Random) -> CanvasPlane:
    """A valid plane with a random pose, built by fitting exact samples."""
    normal = random_unit_quat(rnd)[:3]
    normal = normal / np.linalg.norm(normal)
    anchor = np.array([rnd.uniform(-3, 3) for _ in range(3)])
    # two in-plane directions
    helper = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, helper)
    u = u / np.linalg.norm(u)
    v = np.cross(normal, u)
    samples = [anchor + rnd.uniform(-1, 1) * u + rnd.uniform(-1, 1) * v for _ in range(12)]
    return fit_plane(samples, max_rms=0.01)


_AUTHOR_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789 _-àéîöñJosé日本語🎨"


def random_text(rnd: random.Random, max_bytes: int) -> str:
    out = ""
    for _ in range(rnd.randrange(0, 24)):
        c = rnd.choice(_AUTHOR_CHARS)
        if len((out + c).encode("utf-8")) > max_bytes:
            break
        out += c
    return out


def random_centerline(rnd: random.Random, tool: Tool, max_points=12) -> Centerline:
    n = rnd.randrange(1, max_points + 1)
    start = np.array([rnd.uniform(-2, 2) for _ in range(3)])
    steps = np.array([[rnd.gauss(0, 0.05) for _ in range(3)] for _ in range(n)])
    steps[0] = 0
    pts = start + np.cumsum(steps, axis=0)
    ts = np.cumsum([rnd.uniform(0.01, 0.1) for _ in range(n)])
    pressure = [rnd.random() for _ in range(n)]
    return Centerline(pts, ts, tool, pressure)


def random_brush(rnd: random.Random, tool: Tool) -> BrushParams:
    return BrushParams(
        tool=tool,
        base_width=rnd.uniform(0.005, 0.3),
        color=tuple(rnd.random() for _ in range(4)),
        spray_cone_half_angle=rnd.uniform(0.01, math.pi / 4),
        spray_range=rnd.uniform(0.1, 2.0),
        drip_probability=rnd.random(),
        drip_max_length=rnd.uniform(0.0, 0.5),
    )


def random_stroke(rnd: random.Random, stroke_id: int, allow_2d: bool) -> Stroke:
    tool = rnd.choice([Tool.SPRAY, Tool.DRIP_MOP])
    mode = DrawMode.CANVAS2D if allow_2d and rnd.random() < 0.5 else DrawMode.FREE3D
    drips = tuple(
        DripSeed(
            anchor=[rnd.uniform(-2, 2) for _ in range(3)],
            length=rnd.uniform(0, 0.4),
            width=rnd.uniform(0.001, 0.1),
        )
        for _ in range(rnd.randrange(0, 4))
    )
    return Stroke(
        id=stroke_id,
        centerline=random_centerline(rnd, tool),
        brush=random_brush(rnd, tool),
        mode=mode,
        drips=drips,
    )


def random_artwork(rnd: random.Random, max_strokes=4) -> Artwork:
    canvas = random_plane(rnd) if rnd.random() < 0.6 else None
    ids = rnd.sample(range(1, 1 << 20), k=rnd.randrange(0, max_strokes + 1))
    strokes = tuple(
        random_stroke(rnd, sid, allow_2d=canvas is not None) for sid in ids
    )
    placement = PlacementTransform(
        translation=[rnd.uniform(-5, 5) for _ in range(3)],
        rotation=random_unit_quat(rnd),
        scale=rnd.uniform(0.2, 4.0),
    )
    import uuid

    return Artwork(
        artwork_id=str(uuid.UUID(int=rnd.getrandbits(128))),
        author=random_text(rnd, 64),
        title=random_text(rnd, 256),
        created_at=rnd.uniform(0, 2_000_000_000),
        canvas=canvas,
        strokes=strokes,
        placement=placement,
    )


# ---------------------------------------------------------------------------
# A real HTTP server for tests that need true concurrency or a subprocess
# client (the CLI). Runs uvicorn on an ephemeral port in a daemon thread.


class LiveService:
    def __init__(self, data_dir):
        self.app = create_app(data_dir=data_dir)
        self.store = self.app.state.store
        cfg = uvicorn.Config(self.app, host="127.0.0.1", port=0, log_level="error")
        self.server = uvicorn.Server(cfg)
        self.thread = threading.Thread(target=self.server.run, daemon=True)
        self.url = ""

    def start(self):
        self.thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("service did not start")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.url = f"http://127.0.0.1:{port}"

    def stop(self):
        self.server.should_exit = True
        self.thread.join(timeout=10)


@pytest.fixture
def live_service(tmp_path):
    svc = LiveService(tmp_path / "data")
    svc.start()
    yield svc
    svc.stop()
