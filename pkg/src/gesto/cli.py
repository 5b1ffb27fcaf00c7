"""Command-line front door: replay pose logs, pack/inspect artwork files,
and push/pull against the persistence service.

Exit codes: 0 success, 2 parse/usage error, 3 degenerate or noisy scan,
4 write failure, 5 HTTP error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import requests

from . import config
from .artwork_model import decode, derived_artwork_id, encode, to_debug_json
from .brush_mesh import BrushParams
from .canvas_registration import DrawMode, fit_plane, read_scan_samples
from .engine import ReplaySettings, pack_artwork, replay
from .errors import DegenerateScanError, GestoError, NoisyScanError
from .mesh_io import write_mesh
from .stroke_pipeline import Tool, read_pose_log

_BRUSH_KEYS = {
    "width": "base_width",
    "base_width": "base_width",
    "color": "color",
    "half_angle": "spray_cone_half_angle",
    "spray_cone_half_angle": "spray_cone_half_angle",
    "range": "spray_range",
    "spray_range": "spray_range",
    "drip_probability": "drip_probability",
    "drip_max_length": "drip_max_length",
}


def _parse_brush(pairs: list[str]) -> dict:
    overrides: dict = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or key not in _BRUSH_KEYS:
            known = ", ".join(sorted(set(_BRUSH_KEYS)))
            raise GestoError(f"bad brush setting {pair!r}; expected key=value with key in {{{known}}}")
        field = _BRUSH_KEYS[key]
        if field == "color":
            parts = [float(x) for x in value.split(",")]
            if len(parts) == 3:
                parts.append(1.0)
            if len(parts) != 4:
                raise GestoError(f"color needs r,g,b[,a], got {value!r}")
            overrides[field] = tuple(parts)
        else:
            overrides[field] = float(value)
    return overrides


def _build_settings(args) -> ReplaySettings:
    overrides = _parse_brush(args.brush or [])
    brushes = {tool: BrushParams(tool=tool, **overrides) for tool in Tool}
    return ReplaySettings(
        mode=DrawMode(args.mode),
        brushes=brushes,
        min_spacing=args.spacing,
        smooth_window=args.smooth_window,
        tube_sides=args.sides,
        seed=args.seed,
    )


def _load_scene(args):
    """Read poses and, when needed, fit the scan plane."""
    samples = read_pose_log(args.poses)
    plane = None
    if args.mode == "2d" and not args.scan:
        print("usage: --mode 2d requires --scan FILE", file=sys.stderr)
        return None
    if args.scan:
        plane = fit_plane(read_scan_samples(args.scan), config.DEFAULT_SCAN_MAX_RMS)
    return samples, plane


def cmd_replay(args) -> int:
    scene = _load_scene(args)
    if scene is None:
        return 2
    samples, plane = scene
    result = replay(samples, _build_settings(args), plane)
    if args.out:
        try:
            write_mesh(result.mesh, args.out)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 4
    print(result.stats_line())
    return 0


def _derived_id(args) -> str:
    """Stable id from the pack inputs, so equal inputs pack identically."""
    manifest = {
        "poses": hashlib.sha256(Path(args.poses).read_bytes()).hexdigest(),
        "scan": hashlib.sha256(Path(args.scan).read_bytes()).hexdigest() if args.scan else None,
        "mode": args.mode,
        "seed": args.seed,
        "spacing": args.spacing,
        "window": args.smooth_window,
        "sides": args.sides,
        "brush": sorted(args.brush or []),
        "author": args.author,
        "title": args.title,
    }
    digest = hashlib.sha256(json.dumps(manifest, sort_keys=True).encode("utf-8"))
    return derived_artwork_id(digest.digest())


def cmd_pack(args) -> int:
    scene = _load_scene(args)
    if scene is None:
        return 2
    samples, plane = scene
    artwork = pack_artwork(
        samples,
        _build_settings(args),
        plane,
        artwork_id=args.id or _derived_id(args),
        author=args.author,
        title=args.title,
    )
    try:
        Path(args.out).write_bytes(encode(artwork))
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 4
    print(artwork.artwork_id)
    return 0


def cmd_inspect(args) -> int:
    artwork = decode(Path(args.file).read_bytes())
    print(to_debug_json(artwork))
    return 0


def _http_fail(resp) -> int:
    print(f"error: {resp.status_code} {resp.text}", file=sys.stderr)
    return 5


def cmd_push(args) -> int:
    data = Path(args.file).read_bytes()
    resp = requests.post(
        f"{args.server.rstrip('/')}/v1/artworks",
        data=data,
        headers={"Authorization": f"Bearer {args.token}"},
    )
    if resp.status_code // 100 != 2:
        return _http_fail(resp)
    print(resp.json()["artwork_id"])
    return 0


def cmd_pull(args) -> int:
    resp = requests.get(f"{args.server.rstrip('/')}/v1/artworks/{args.id}")
    if resp.status_code // 100 != 2:
        return _http_fail(resp)
    try:
        Path(args.out).write_bytes(resp.content)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 4
    return 0


def _add_pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--poses", required=True, help="pose log (JSON lines)")
    p.add_argument("--mode", choices=["2d", "3d"], default="3d")
    p.add_argument("--scan", help="scan samples for canvas registration (JSON lines)")
    p.add_argument("--brush", nargs="*", metavar="K=V", help="brush overrides, e.g. width=0.1")
    p.add_argument("--seed", type=int, default=0, help="drip randomness seed")
    p.add_argument("--spacing", type=float, default=config.DEFAULT_MIN_SPACING,
                   help="resample spacing in meters")
    p.add_argument("--smooth-window", type=int, default=config.DEFAULT_SMOOTH_WINDOW,
                   help="odd moving-average window")
    p.add_argument("--sides", type=int, default=config.DEFAULT_TUBE_SIDES,
                   help="tube cross-section sides (3d mode)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gesto", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="replay a pose log into a mesh and stats")
    _add_pipeline_flags(p)
    p.add_argument("--out", help="mesh output (.obj or .glb)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("pack", help="replay a pose log into an artwork file")
    _add_pipeline_flags(p)
    p.add_argument("--author", required=True)
    p.add_argument("--title", required=True)
    p.add_argument("--out", required=True, help="artwork output (.gstb)")
    p.add_argument("--id", help="artwork id (UUID); derived from inputs when omitted")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("inspect", help="print the debug text form of an artwork file")
    p.add_argument("file")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("push", help="upload an artwork file to the service")
    p.add_argument("--server", default=f"http://{config.DEFAULT_ADDR}")
    p.add_argument("--token", required=True)
    p.add_argument("file")
    p.set_defaults(func=cmd_push)

    p = sub.add_parser("pull", help="download an artwork by id")
    p.add_argument("--server", default=f"http://{config.DEFAULT_ADDR}")
    p.add_argument("--token", help="unused; reads are public")
    p.add_argument("id")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pull)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (DegenerateScanError, NoisyScanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    # RequestException subclasses OSError, so it must be caught first
    except requests.RequestException as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except (GestoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
