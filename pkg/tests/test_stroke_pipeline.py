"""Pose stream to centerline: nib transform, segmentation, resampling,
smoothing, and the pose-log wire format."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gesto.errors import InvalidPoseError, ParameterError, PoseLogError
from gesto.stroke_pipeline import (
    Centerline,
    NibOffset,
    PoseSample,
    Tool,
    format_pose_log,
    nib_position,
    parse_pose_log,
    read_pose_log,
    resample,
    segment_strokes,
    smooth,
    write_pose_log,
)

from conftest import pose, straight_stream
from oracles import ref_moving_average, ref_resample


def line(points, tool=Tool.SPRAY, pressure=None):
    return Centerline(points, np.arange(len(points), dtype=float), tool, pressure)


# ---------------------------------------------------------------------------
# nib_position


def test_nib_identity_pose_at_origin():
    p = pose(0.0, (0, 0, 0))
    out = nib_position(p, NibOffset((0, 0.08, 0)))
    assert np.allclose(out, [0, 0.08, 0], atol=1e-12)


def test_nib_pure_translation():
    p = pose(0.0, (1, 2, 3))
    out = nib_position(p, NibOffset((0, 0.08, 0)))
    assert np.allclose(out, [1, 2.08, 3], atol=1e-12)


def test_nib_rotation_about_z():
    # 90 degrees about +z maps +x to +y
    half = math.sqrt(0.5)
    p = pose(0.0, (0, 0, 0), q=(half, 0, 0, half))
    out = nib_position(p, NibOffset((0.08, 0, 0)))
    assert np.allclose(out, [0, 0.08, 0], atol=1e-9)


def test_non_unit_quaternion_rejected():
    with pytest.raises(InvalidPoseError):
        pose(0.0, (0, 0, 0), q=(1.0, 0.5, 0, 0))


def test_nib_offset_magnitude_bound():
    with pytest.raises(ParameterError):
        NibOffset((0.6, 0, 0))


@given(
    st.lists(st.floats(-0.25, 0.25), min_size=3, max_size=3),
    st.lists(st.floats(-0.25, 0.25), min_size=3, max_size=3),
    st.lists(st.floats(-1, 1), min_size=4, max_size=4),
)
def test_nib_is_rigid_in_the_offset(a, b, q_raw):
    norm = math.sqrt(sum(x * x for x in q_raw))
    if norm < 1e-3:
        q_raw = [1, 0, 0, 0]
        norm = 1.0
    q = [x / norm for x in q_raw]
    p = pose(0.0, (0.3, -0.2, 1.0), q=q)
    na = nib_position(p, NibOffset(a))
    nb = nib_position(p, NibOffset(b))
    gap = np.linalg.norm(np.subtract(a, b))
    assert abs(np.linalg.norm(na - nb) - gap) < 1e-9


# ---------------------------------------------------------------------------
# segment_strokes


def test_all_unpressed_yields_nothing():
    stream = straight_stream(5, pressed=False)
    assert segment_strokes(stream, NibOffset()) == []


def test_empty_stream_yields_nothing():
    assert segment_strokes([], NibOffset()) == []


def test_press_runs_split_into_centerlines():
    flags = [False, True, True, False, True, False]
    stream = [pose(i * 0.1, (i * 0.1, 0, 0), pressed=f) for i, f in enumerate(flags)]
    lines = segment_strokes(stream, NibOffset())
    assert [len(l) for l in lines] == [2, 1]


def test_tool_switch_mid_press_splits():
    tools = [Tool.SPRAY, Tool.SPRAY, Tool.DRIP_MOP, Tool.DRIP_MOP, Tool.DRIP_MOP]
    stream = [pose(i * 0.1, (i * 0.1, 0, 0), tool=t) for i, t in enumerate(tools)]
    lines = segment_strokes(stream, NibOffset())
    assert [len(l) for l in lines] == [2, 3]
    assert lines[0].tool is Tool.SPRAY
    assert lines[1].tool is Tool.DRIP_MOP


def test_points_are_nib_positions():
    stream = straight_stream(4, y=1.0)
    lines = segment_strokes(stream, NibOffset((0, 0.08, 0)))
    assert np.allclose(lines[0].points[:, 1], 1.08)


def test_non_increasing_timestamps_rejected():
    stream = [pose(0.0, (0, 0, 0)), pose(0.0, (1, 0, 0))]
    with pytest.raises(InvalidPoseError):
        segment_strokes(stream, NibOffset())


@given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=40))
def test_segmentation_partitions_pressed_samples(flags):
    stream = [
        pose(i * 0.1, (i * 0.05, 0, 0), pressed=p,
             tool=Tool.SPRAY if s else Tool.DRIP_MOP)
        for i, (p, s) in enumerate(flags)
    ]
    lines = segment_strokes(stream, NibOffset())
    assert sum(len(l) for l in lines) == sum(1 for p, _ in flags if p)


# ---------------------------------------------------------------------------
# resample


def test_identical_points_collapse_to_one():
    l = line([[0.3, 0.4, 0.5]] * 7)
    out = resample(l, 0.1)
    assert len(out) == 1
    assert np.array_equal(out.points[0], [0.3, 0.4, 0.5])


def test_straight_meter_at_tenth_spacing():
    l = line([[0, 0, 0], [1, 0, 0]])
    out = resample(l, 0.1)
    assert len(out) == 11
    assert np.allclose(out.points[:, 0], np.arange(11) * 0.1, atol=1e-9)
    assert np.array_equal(out.points[0], [0, 0, 0])
    assert np.array_equal(out.points[-1], [1, 0, 0])


def test_short_segment_keeps_both_endpoints():
    l = line([[0, 0, 0], [0.05, 0, 0]])
    out = resample(l, 0.1)
    assert len(out) == 2
    assert np.array_equal(out.points[0], [0, 0, 0])
    assert np.array_equal(out.points[-1], [0.05, 0, 0])


def test_nonpositive_spacing_rejected():
    l = line([[0, 0, 0], [1, 0, 0]])
    for bad in (0.0, -0.1):
        with pytest.raises(ParameterError):
            resample(l, bad)


@given(
    st.lists(
        st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)),
        min_size=2,
        max_size=12,
    ),
    st.sampled_from([0.01, 0.05, 0.21]),
)
def test_resample_matches_arc_walk_reference(pts, spacing):
    out = resample(line(pts), spacing)
    expected = ref_resample(pts, spacing)
    assert len(out) == len(expected)
    assert np.allclose(out.points, expected, atol=1e-9)


@given(
    st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)),
             min_size=2, max_size=10)
)
def test_resample_spacing_invariant(pts):
    out = resample(line(pts), 0.05)
    if len(out) > 2:
        gaps = np.linalg.norm(np.diff(out.points[:-1], axis=0), axis=1)
        # interior gaps may only exceed spacing on corners where the chord
        # between arc positions straightens a bend; never fall below
        assert np.all(gaps <= 0.05 + 1e-9)
    assert np.array_equal(out.points[0], np.asarray(pts, dtype=float)[0])


@given(
    st.floats(0.0, 1e-3),
    st.integers(3, 9),
)
def test_resample_idempotence_on_gentle_curves(bend, n):
    # near-collinear input: re-resampling reproduces counts and positions
    pts = [[i * 0.07, bend * math.sin(i), 0.0] for i in range(n)]
    once = resample(line(pts), 0.02)
    twice = resample(once, 0.02)
    assert len(twice) == len(once)
    assert np.allclose(twice.points, once.points, atol=1e-6)


def test_resample_interpolates_time_and_pressure():
    l = Centerline([[0, 0, 0], [1, 0, 0]], [0.0, 2.0], Tool.SPRAY, [0.0, 1.0])
    out = resample(l, 0.25)
    assert np.allclose(out.timestamps, [0, 0.5, 1.0, 1.5, 2.0], atol=1e-9)
    assert np.allclose(out.pressure, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-9)


# ---------------------------------------------------------------------------
# smooth


def test_window_one_is_identity():
    pts = [[0, 0, 0], [0.3, 0.5, 0], [0.1, 0.9, 0.4], [1, 1, 1]]
    l = line(pts)
    out = smooth(l, 1)
    assert out == l


def test_collinear_equally_spaced_is_preserved():
    pts = [[i * 0.1, i * 0.2, i * -0.05] for i in range(9)]
    out = smooth(line(pts), 5)
    assert np.allclose(out.points, pts, atol=1e-9)


def test_zigzag_amplitude_shrinks_by_window():
    # alternating +/-0.1 in y; a centered 3-average of (+a,-a,+a) is +a/3
    pts = [[i * 0.1, 0.1 if i % 2 == 0 else -0.1, 0.0] for i in range(9)]
    out = smooth(line(pts), 3)
    interior = out.points[1:-1, 1]
    assert np.allclose(np.abs(interior), 0.1 / 3, atol=1e-12)


@given(
    st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)),
             min_size=1, max_size=14),
    st.sampled_from([1, 3, 5, 7]),
)
def test_smooth_matches_reference(pts, window):
    out = smooth(line(pts), window)
    assert np.allclose(out.points, ref_moving_average(pts, window), atol=1e-12)


@given(
    st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)),
             min_size=2, max_size=14),
    st.sampled_from([3, 5]),
)
def test_smooth_keeps_endpoints_and_window_bounds(pts, window):
    arr = np.asarray(pts, dtype=float)
    out = smooth(line(pts), window)
    assert np.array_equal(out.points[0], arr[0])
    assert np.array_equal(out.points[-1], arr[-1])
    half = window // 2
    n = len(arr)
    for i in range(1, n - 1):
        reach = min(half, i, n - 1 - i)
        window_pts = arr[i - reach : i + reach + 1]
        assert np.all(out.points[i] >= window_pts.min(axis=0) - 1e-12)
        assert np.all(out.points[i] <= window_pts.max(axis=0) + 1e-12)


def test_smooth_deviation_bound():
    pts = [[i * 0.2, (i % 3 - 1) * 0.15, 0.0] for i in range(12)]
    arr = np.asarray(pts)
    seg_max = np.linalg.norm(np.diff(arr, axis=0), axis=1).max()
    for window in (3, 5, 7):
        out = smooth(line(pts), window)
        deviation = np.linalg.norm(out.points - arr, axis=1).max()
        assert deviation <= 0.5 * seg_max * window


def test_even_or_nonpositive_window_rejected():
    l = line([[0, 0, 0], [1, 0, 0]])
    for bad in (0, 2, 4, -3):
        with pytest.raises(ParameterError):
            smooth(l, bad)


def test_smooth_length_preserved():
    pts = [[i * 0.1, (i % 2) * 0.1, 0.0] for i in range(8)]
    assert len(smooth(line(pts), 5)) == 8


# ---------------------------------------------------------------------------
# pose-log format


def test_pose_log_round_trip(tmp_path):
    stream = [
        pose(0.0, (0, 0, 0), tool=Tool.SPRAY),
        pose(0.1, (0.1, 0.2, 0.3), q=(0.5, 0.5, 0.5, 0.5), tool=Tool.DRIP_MOP),
        pose(0.25, (0.2, 0.2, 0.3), pressed=False),
    ]
    path = tmp_path / "log.jsonl"
    write_pose_log(stream, path)
    back = read_pose_log(path)
    assert back == stream


def test_pose_log_text_is_json_lines():
    text = format_pose_log([pose(0.0, (0, 0, 0))])
    assert text.endswith("\n")
    import json

    row = json.loads(text)
    assert set(row) == {"t", "p", "q", "pressed", "tool"}
    assert row["tool"] == "spray"


def test_parse_error_names_the_line():
    good = format_pose_log([pose(0.0, (0, 0, 0))]).strip()
    with pytest.raises(PoseLogError) as exc:
        parse_pose_log([good, good.replace("0.0", "0.5", 1), "not json"])
    assert exc.value.line == 3
    assert "line 3" in str(exc.value)


def test_parse_error_on_missing_field():
    with pytest.raises(PoseLogError, match="'q'"):
        parse_pose_log(['{"t": 0, "p": [0,0,0], "pressed": true, "tool": "spray"}'])


def test_parse_error_on_bad_tool():
    with pytest.raises(PoseLogError, match="line 1"):
        parse_pose_log(['{"t":0,"p":[0,0,0],"q":[1,0,0,0],"pressed":true,"tool":"roller"}'])


def test_parse_error_on_non_increasing_time():
    rows = format_pose_log([pose(0.5, (0, 0, 0))]).strip()
    with pytest.raises(PoseLogError, match="line 2"):
        parse_pose_log([rows, rows])


def test_parse_skips_blank_lines():
    text = format_pose_log([pose(0.0, (0, 0, 0)), pose(0.1, (1, 0, 0))])
    rows = text.splitlines()
    assert parse_pose_log([rows[0], "", rows[1]]) == parse_pose_log(rows)


def test_write_pose_log_to_handle():
    buf = io.StringIO()
    write_pose_log([pose(0.0, (0, 0, 0))], None, fh=buf)
    assert parse_pose_log(buf.getvalue().splitlines())
