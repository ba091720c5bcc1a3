import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sonicguide.mapping import (
    DisplacementVector,
    MappingConfig,
    MappingError,
    SonificationParams,
    in_target_zone,
    invert_params,
    map_position,
)

CFG = MappingConfig()

coords = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
vectors = st.builds(DisplacementVector, coords, coords, coords)


# ---------------------------------------------------------------------------
# map_position
# ---------------------------------------------------------------------------

def test_origin_is_all_neutral_except_zone_noise():
    p = map_position(DisplacementVector(0, 0, 0), CFG)
    assert p.chroma_velocity == 0.0
    assert p.beat_rate == 0.0
    assert p.beat_depth == 0.0
    assert p.roughness_depth == 0.0
    assert p.brightness == 0.0
    assert p.fullness == 0.0
    assert p.noise_gain == 0.03


def test_positive_x_gives_falling_pitch():
    p = map_position(DisplacementVector(0.5, 0, 0), CFG)
    assert p.chroma_velocity == -0.75
    assert p.beat_rate == 0.0 and p.roughness_depth == 0.0
    assert p.brightness == 0.0 and p.fullness == 0.0
    assert p.noise_gain == 0.0


def test_negative_y_gives_beats():
    p = map_position(DisplacementVector(0, -0.5, 0), CFG)
    assert p.beat_rate == 4.0
    assert p.beat_depth == 1.0
    assert p.roughness_depth == 0.0


def test_positive_y_gives_roughness():
    p = map_position(DisplacementVector(0, 1.0, 0), CFG)
    assert p.roughness_depth == pytest.approx(0.9)
    assert p.beat_rate == 0.0 and p.beat_depth == 0.0


def test_negative_z_gives_fullness():
    p = map_position(DisplacementVector(0, 0, -1), CFG)
    assert p.fullness == 1.0
    assert p.brightness == 0.0


def test_out_of_workspace_input_is_clamped():
    p = map_position(DisplacementVector(3.0, -2.0, 0), CFG)
    assert p.chroma_velocity == -CFG.v_max
    assert p.beat_rate == CFG.beat_rate_max


def test_non_finite_input_rejected():
    with pytest.raises(MappingError):
        DisplacementVector(float("nan"), 0, 0)
    with pytest.raises(MappingError):
        DisplacementVector(0, float("inf"), 0)


@given(vectors)
def test_mapped_params_satisfy_their_own_invariants(d):
    p = map_position(d, CFG)
    # construction of SonificationParams already validates; re-build to be sure
    SonificationParams(**p.__dict__)


# ---------------------------------------------------------------------------
# orthogonality, sign, monotonicity, continuity
# ---------------------------------------------------------------------------

@given(vectors, coords)
def test_changing_x_leaves_other_axes_bit_identical(d, new_x):
    p0 = map_position(d, CFG)
    p1 = map_position(DisplacementVector(new_x, d.y, d.z), CFG)
    assert p0.beat_rate == p1.beat_rate
    assert p0.beat_depth == p1.beat_depth
    assert p0.roughness_depth == p1.roughness_depth
    assert p0.brightness == p1.brightness
    assert p0.fullness == p1.fullness


@given(vectors, coords)
def test_changing_y_leaves_other_axes_bit_identical(d, new_y):
    p0 = map_position(d, CFG)
    p1 = map_position(DisplacementVector(d.x, new_y, d.z), CFG)
    assert p0.chroma_velocity == p1.chroma_velocity
    assert p0.brightness == p1.brightness
    assert p0.fullness == p1.fullness


@given(vectors, coords)
def test_changing_z_leaves_other_axes_bit_identical(d, new_z):
    p0 = map_position(d, CFG)
    p1 = map_position(DisplacementVector(d.x, d.y, new_z), CFG)
    assert p0.chroma_velocity == p1.chroma_velocity
    assert p0.beat_rate == p1.beat_rate
    assert p0.beat_depth == p1.beat_depth
    assert p0.roughness_depth == p1.roughness_depth


@given(coords)
def test_chroma_sign_is_opposite_of_x(x):
    p = map_position(DisplacementVector(x, 0, 0), CFG)
    d = DisplacementVector(x, 0, 0)  # sign after quantization
    if d.x != 0.0:
        assert math.copysign(1.0, p.chroma_velocity) == -math.copysign(1.0, d.x)
    else:
        assert p.chroma_velocity == 0.0


def _sweep(axis: str, values):
    frames = []
    for v in values:
        kwargs = {"x": 0.0, "y": 0.0, "z": 0.0, axis: float(v)}
        frames.append(map_position(DisplacementVector(**kwargs), CFG))
    return frames


@pytest.mark.parametrize(
    "axis,field,lipschitz",
    [
        ("x", "chroma_velocity", CFG.v_max),
        ("y", "beat_rate", CFG.beat_rate_max),
        ("y", "beat_depth", 1.0 / CFG.beat_depth_ramp),
        ("y", "roughness_depth", CFG.roughness_depth_max),
        ("z", "brightness", 1.0),
        ("z", "fullness", 1.0),
    ],
)
def test_lipschitz_continuity_across_zero(axis, field, lipschitz):
    values = np.linspace(-1.0, 1.0, 4001)
    frames = _sweep(axis, values)
    series = np.array([getattr(p, field) for p in frames])
    step = np.max(np.abs(np.diff(series)))
    dv = np.max(np.abs(np.diff([getattr(DisplacementVector(**{
        "x": 0.0, "y": 0.0, "z": 0.0, axis: float(v)}), axis) for v in values])))
    assert step <= lipschitz * dv * (1 + 1e-9)


@pytest.mark.parametrize(
    "axis,sign,field",
    [
        ("x", +1, "chroma_velocity"),
        ("x", -1, "chroma_velocity"),
        ("y", -1, "beat_rate"),
        ("y", +1, "roughness_depth"),
        ("z", +1, "brightness"),
        ("z", -1, "fullness"),
    ],
)
def test_intensity_monotone_in_own_coordinate_magnitude(axis, sign, field):
    mags = np.linspace(0.0, 1.0, 50)
    frames = _sweep(axis, sign * mags)
    series = np.array([abs(getattr(p, field)) for p in frames])
    assert np.all(np.diff(series) >= 0.0)
    assert series[-1] > series[0]


# ---------------------------------------------------------------------------
# invert_params round trip
# ---------------------------------------------------------------------------

def test_all_neutral_params_invert_to_origin():
    d = invert_params(SonificationParams(), CFG)
    assert (d.x, d.y, d.z) == (0.0, 0.0, 0.0)


def test_chroma_velocity_inverts_linearly():
    d = invert_params(SonificationParams(chroma_velocity=-0.75), CFG)
    assert d.x == 0.5


def test_round_trip_is_exact_for_1000_random_vectors():
    # brute-force oracle: independent loop over uniformly random vectors
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(1000):
        raw = rng.uniform(-1.0, 1.0, size=3)
        d = DisplacementVector(*raw)
        back = invert_params(map_position(d, CFG), CFG)
        worst = max(worst, abs(back.x - d.x), abs(back.y - d.y), abs(back.z - d.z))
    assert worst == 0.0


@given(vectors)
@settings(max_examples=300)
def test_round_trip_is_exact_property(d):
    back = invert_params(map_position(d, CFG), CFG)
    assert (back.x, back.y, back.z) == (d.x, d.y, d.z)


def test_round_trip_inside_beat_ramp_uses_rate():
    d = DisplacementVector(0, -0.01, 0)  # below beat_depth_ramp, depth not saturated
    p = map_position(d, CFG)
    assert 0.0 < p.beat_depth < 1.0
    back = invert_params(p, CFG)
    assert back.y == d.y


def test_invalid_param_frame_rejected():
    with pytest.raises(MappingError):
        SonificationParams(beat_rate=4.0, roughness_depth=0.5)
    with pytest.raises(MappingError):
        SonificationParams(brightness=0.2, fullness=0.2)
    with pytest.raises(MappingError):
        SonificationParams(beat_depth=1.5)


# ---------------------------------------------------------------------------
# in_target_zone
# ---------------------------------------------------------------------------

def test_origin_in_zone():
    assert in_target_zone(DisplacementVector(0, 0, 0), CFG)


def test_zone_boundary_is_inclusive():
    assert in_target_zone(DisplacementVector(0.05, 0, 0), CFG)


def test_just_outside_zone_by_norm():
    # direct norm computation: sqrt(0.04^2 + 0.04^2) ~ 0.0566 > 0.05
    d = DisplacementVector(0.04, 0.04, 0)
    assert math.sqrt(d.x**2 + d.y**2 + d.z**2) > 0.05
    assert not in_target_zone(d, CFG)


def test_config_validation():
    with pytest.raises(MappingError):
        MappingConfig(v_max=-1.0)
    with pytest.raises(MappingError):
        MappingConfig(hysteresis=0.05, target_radius=0.05)
