import numpy as np
import pytest

from sonicguide.earcons import CLICK, TRIAD, ZONE_ENTER
from sonicguide.mapping import DisplacementVector as DV
from sonicguide.mapping import MappingConfig
from sonicguide.stream import GuideRenderer, StreamError, render_stream
from sonicguide.synth import SynthConfig

MAPPING = MappingConfig()
SYNTH = SynthConfig()


def test_single_position_renders_requested_duration():
    audio, events = render_stream([(0.0, DV(0, 0, 0))], duration=1.0)
    assert len(audio.frames) == 48000
    assert events == []


def test_duration_defaults_to_last_timestamp():
    audio, _ = render_stream([(0.0, DV(0, 0, 0)), (2.5, DV(0.5, 0, 0))])
    assert len(audio.frames) == round(2.5 * 48000)


def test_empty_sequence_rejected():
    with pytest.raises(StreamError):
        render_stream([])


def test_non_monotone_timestamps_rejected():
    with pytest.raises(StreamError):
        render_stream([(0.0, DV(0, 0, 0)), (0.0, DV(1, 0, 0))])


def test_position_held_after_last_sample():
    audio, _ = render_stream([(0.0, DV(0.5, 0, 0))], duration=0.5)
    # same render, longer hold: first half identical
    longer, _ = render_stream([(0.0, DV(0.5, 0, 0))], duration=1.0)
    assert np.array_equal(longer.frames[: len(audio.frames)], audio.frames)


def test_crossing_fires_once_with_interpolation():
    audio, events = render_stream(
        [(0.0, DV(0.3, 0.4, 0.2)), (2.0, DV(0.3, -0.4, -0.2))],
    )
    kinds = sorted(e.kind for e in events)
    assert kinds == [CLICK, TRIAD]
    for e in events:
        assert abs(e.time - 1.0) < 0.02


def test_demo_fixture_event_inventory():
    from sonicguide.trajectory import load_trajectory

    traj = load_trajectory("fixtures/demo.csv")
    audio, events = render_stream(traj.samples, MAPPING, SYNTH, mode="3d")
    kinds = [e.kind for e in events]
    assert kinds.count(CLICK) == 1
    assert kinds.count(TRIAD) == 1
    assert kinds.count(ZONE_ENTER) == 1
    assert len(kinds) == 3
    assert len(audio.frames) == 8 * 48000


def test_sweep_across_seams_has_no_click_discontinuity():
    # parameter seams y=0 and z=0 crossed mid-stream: inter-sample jumps
    # of the guidance tone bounded by the steady-state maximum + 10 %
    # (the deliberate click/triad cues are excluded: earcons=False)
    sr = SYNTH.sample_rate
    audio, _ = render_stream(
        [(0.0, DV(0.3, 0.6, 0.6)), (4.0, DV(0.3, -0.6, -0.6))], earcons=False,
    )
    sweep = np.abs(np.diff(audio.frames[sr // 2:].astype(np.float64))).max()

    steady = 0.0
    for frac in np.linspace(0.0, 1.0, 9):
        d = DV(0.3, 0.6 - 1.2 * frac, 0.6 - 1.2 * frac)
        block, _ = render_stream([(0.0, d)], duration=1.0, earcons=False)
        steady = max(steady, np.abs(np.diff(block.frames[sr // 2:].astype(np.float64))).max())
    assert sweep <= steady * 1.1


def test_hold_mode_uses_latest_position_before_block_end():
    block_t = SYNTH.block_size / SYNTH.sample_rate
    # a position landing exactly on a block boundary applies to the block
    # that starts there, not the one that ends there
    positions = [(0.0, DV(0, 0, 0)), (block_t * 10, DV(1, 0, 0))]
    held, _ = render_stream(positions, duration=block_t * 20, interpolate=False)
    ref_a, _ = render_stream([(0.0, DV(0, 0, 0))], duration=block_t * 10)
    assert np.array_equal(held.frames[: len(ref_a.frames)], ref_a.frames)
    # and the block starting at the boundary must differ from pure silence hold
    ref_b, _ = render_stream([(0.0, DV(0, 0, 0))], duration=block_t * 20)
    assert not np.array_equal(held.frames, ref_b.frames)


def test_renderer_clock_advances_block_by_block():
    r = GuideRenderer(MAPPING, SYNTH)
    assert r.clock == 0.0
    r.render_next(DV(0, 0, 0))
    assert r.clock == pytest.approx(SYNTH.block_size / SYNTH.sample_rate)


def test_earcon_mix_stays_inside_unit_range():
    # both planes crossed at once right at the zone edge: click + triad
    # over the tone must still respect the output bound
    audio, events = render_stream(
        [(0.0, DV(0.02, 0.3, 0.3)), (1.0, DV(0.02, -0.3, -0.3))],
    )
    assert len(events) >= 2
    assert np.all(np.abs(audio.frames) <= 1.0)
