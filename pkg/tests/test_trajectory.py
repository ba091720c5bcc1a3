import io
import math

import numpy as np
import pytest

from sonicguide.mapping import DisplacementVector
from sonicguide.trajectory import (
    SessionLogWriter,
    Trajectory,
    TrajectoryError,
    parse_trajectory,
    read_session_log,
    resample,
    serialize_trajectory,
)


def test_parse_minimal():
    traj = parse_trajectory("t,x,y,z\n0,0,0,0\n1,0.5,0,0\n")
    assert len(traj.samples) == 2
    assert traj.samples[1][1].x == 0.5
    assert traj.mode == "2d"           # all z zero


def test_mode_inferred_3d():
    traj = parse_trajectory("t,x,y,z\n0,0,0,0.5\n")
    assert traj.mode == "3d"


def test_comments_and_blank_lines_skipped():
    text = "# a demo\n\nt,x,y,z\n# body comment\n0,1,0,0\n"
    assert len(parse_trajectory(text).samples) == 1


def test_non_monotone_time_names_line():
    with pytest.raises(TrajectoryError, match="line 4"):
        parse_trajectory("t,x,y,z\n0,0,0,0\n1,0,0,0\n0.5,0,0,0\n")


def test_malformed_row_names_line():
    with pytest.raises(TrajectoryError, match="line 3"):
        parse_trajectory("t,x,y,z\n0,0,0,0\n1,oops,0,0\n")
    with pytest.raises(TrajectoryError, match="line 2"):
        parse_trajectory("t,x,y,z\n0,0,0\n")


def test_missing_header_rejected():
    with pytest.raises(TrajectoryError, match="header"):
        parse_trajectory("0,0,0,0\n")


def test_out_of_workspace_coordinates_accepted():
    traj = parse_trajectory("t,x,y,z\n0,2.5,-3,0\n")
    assert traj.samples[0][1].x == 2.5


def test_round_trip_bit_identical_10k_rows():
    rng = np.random.default_rng(99)
    times = np.cumsum(rng.uniform(0.001, 0.1, size=10_000))
    rows = ["t,x,y,z"]
    for t, (x, y, z) in zip(times, rng.uniform(-1, 1, size=(10_000, 3))):
        rows.append(f"{float(t)!r},{float(x)!r},{float(y)!r},{float(z)!r}")
    first = parse_trajectory("\n".join(rows))
    second = parse_trajectory(serialize_trajectory(first))
    assert first.samples == second.samples


def test_2d_mode_rejects_nonzero_z():
    with pytest.raises(TrajectoryError):
        Trajectory(((0.0, DisplacementVector(0, 0, 0.1)),), mode="2d")


# ---------------------------------------------------------------------------
# resample
# ---------------------------------------------------------------------------

def test_resample_two_samples_midpoint():
    traj = parse_trajectory("t,x,y,z\n0,0,0,0\n1,1,0,0\n")
    points = resample(traj, 4.0)
    assert len(points) == 5
    assert points[2].x == pytest.approx(0.5)


def test_resample_single_sample_constant():
    traj = parse_trajectory("t,x,y,z\n0,0.3,0.2,0.1\n")
    points = resample(traj, 10.0)
    assert len(points) == 1
    assert points[0].x == pytest.approx(0.3, abs=1e-7)


def test_resample_exact_on_original_times():
    traj = parse_trajectory("t,x,y,z\n0,0,0,0\n0.5,0.25,0,0\n1,1,0,0\n")
    points = resample(traj, 2.0)   # grid hits 0, 0.5, 1.0
    assert points[0].x == 0.0
    assert points[1].x == 0.25
    assert points[2].x == 1.0


def test_resample_rate_validated():
    traj = parse_trajectory("t,x,y,z\n0,0,0,0\n")
    with pytest.raises(TrajectoryError):
        resample(traj, 0.0)


def test_resampled_chroma_phase_matches_analytic_integral():
    # linear x ramp: integrate v = -v_max * x(t) over the resampled control
    # points and compare to the closed-form integral
    traj = parse_trajectory("t,x,y,z\n0,-1,0,0\n10,1,0,0\n")
    rate = 100.0
    points = resample(traj, rate)
    v = np.array([-1.5 * p.x for p in points])
    phase_numeric = np.sum(v[:-1] + np.diff(v) / 2.0) / rate   # trapezoid
    # analytic: integral of -1.5 * (-1 + 0.2 t) dt over [0, 10] = 0
    assert abs(phase_numeric - 0.0) < 1e-3


def test_interpolation_and_hold_lookup():
    traj = parse_trajectory("t,x,y,z\n0,0,0,0\n1,1,0,0\n")
    assert traj.at(0.25).x == pytest.approx(0.25)
    assert traj.before(0.999).x == 0.0
    assert traj.before(1.0).x == 1.0
    assert traj.before(1.0, strict=True).x == 0.0
    assert traj.before(-5.0).x == 0.0


# ---------------------------------------------------------------------------
# session logs
# ---------------------------------------------------------------------------

def test_session_log_round_trip(tmp_path):
    path = tmp_path / "session.jsonl"
    with SessionLogWriter(path) as log:
        log.write({"type": "trial_start", "t": 0.0, "trial_id": 1})
        log.write({"type": "pos", "t": 0.1, "x": 0.5, "y": 0.0, "z": 0.0})
        log.write({"type": "event", "t": 0.2, "kind": "click"})
        log.write({"type": "trial_end", "t": 1.0, "outcome": "hit"})
    records = read_session_log(path)
    assert [r["type"] for r in records] == ["trial_start", "pos", "event", "trial_end"]
    assert records[1]["x"] == 0.5


def test_session_log_requires_type():
    buffer = io.StringIO()
    log = SessionLogWriter(buffer)
    with pytest.raises(ValueError):
        log.write({"t": 0.0})


def test_session_log_rejects_garbage():
    with pytest.raises(TrajectoryError, match="line 2"):
        read_session_log(['{"type":"pos"}', "{not json"])
