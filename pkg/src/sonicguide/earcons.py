"""Discrete auditory cues layered over the guidance tone.

A click marks crossing the x-y plane (sign change of z), a short major
triad marks crossing the x-z plane (sign change of y), and entering or
leaving the target zone gates the pink-noise bed.  Crossings are
debounced: after firing, an axis re-arms only once the coordinate
exceeds the hysteresis excursion again, so pointer jitter around a
plane cannot machine-gun the cue, while deliberate repeated crossings
retrigger normally.

In 2D mode there is no z axis and the click binds to y crossings, the
"target height" of the two-dimensional task.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .mapping import DisplacementVector, MappingConfig, in_target_zone
from .synth import AudioBlock, SynthConfig

__all__ = [
    "CLICK",
    "TRIAD",
    "ZONE_ENTER",
    "ZONE_EXIT",
    "EarconEvent",
    "CrossingState",
    "init_crossing_state",
    "detect_events",
    "render_earcon",
]

Mode = Literal["2d", "3d"]

CLICK = "click"
TRIAD = "triad"
ZONE_ENTER = "zone_enter"
ZONE_EXIT = "zone_exit"

_CLICK_SECONDS = 0.003
_CLICK_PEAK = 0.5            # -6 dBFS
_TRIAD_FREQS_HZ = (523.25, 659.26, 783.99)   # C major at C5
_TRIAD_SECONDS = 0.18
_TRIAD_PEAK = 10.0 ** (-9.0 / 20.0)          # -9 dBFS
_CLICK_SEED = 0xC11C


@dataclass(frozen=True)
class EarconEvent:
    kind: str
    time: float   # seconds from stream start

    def as_dict(self) -> dict:
        return {"kind": self.kind, "time": self.time}


@dataclass
class CrossingState:
    mode: Mode
    armed_y: bool
    armed_z: bool
    last_sign_y: int
    last_sign_z: int
    in_zone: bool


def _sign(value: float, previous: int) -> int:
    if value > 0.0:
        return 1
    if value < 0.0:
        return -1
    return previous


def init_crossing_state(d0: DisplacementVector, cfg: MappingConfig, mode: Mode = "3d") -> CrossingState:
    return CrossingState(
        mode=mode,
        armed_y=abs(d0.y) > cfg.hysteresis,
        armed_z=abs(d0.z) > cfg.hysteresis,
        last_sign_y=_sign(d0.y, 1),
        last_sign_z=_sign(d0.z, 1),
        in_zone=in_target_zone(d0, cfg),
    )


def _crossing_time(t_prev: float, t_next: float, c_prev: float, c_next: float) -> float:
    """Linear zero-crossing estimate between two samples."""
    span = abs(c_prev) + abs(c_next)
    if span == 0.0 or t_next <= t_prev:
        return t_next
    return t_prev + (t_next - t_prev) * abs(c_prev) / span


def detect_events(
    prev: DisplacementVector,
    next: DisplacementVector,
    state: CrossingState,
    cfg: MappingConfig,
    t_prev: float = 0.0,
    t_next: float = 0.0,
) -> list[EarconEvent]:
    """Advance the crossing state from ``prev`` to ``next`` and return
    the cues fired by this step, timestamped inside [t_prev, t_next]."""
    events: list[EarconEvent] = []

    sign_y = _sign(next.y, state.last_sign_y)
    if state.armed_y and sign_y != state.last_sign_y:
        kind = CLICK if state.mode == "2d" else TRIAD
        events.append(EarconEvent(kind, _crossing_time(t_prev, t_next, prev.y, next.y)))
        state.armed_y = False
    state.last_sign_y = sign_y
    if abs(next.y) > cfg.hysteresis:
        state.armed_y = True

    if state.mode == "3d":
        sign_z = _sign(next.z, state.last_sign_z)
        if state.armed_z and sign_z != state.last_sign_z:
            events.append(EarconEvent(CLICK, _crossing_time(t_prev, t_next, prev.z, next.z)))
            state.armed_z = False
        state.last_sign_z = sign_z
        if abs(next.z) > cfg.hysteresis:
            state.armed_z = True

    zone = in_target_zone(next, cfg)
    if zone != state.in_zone:
        events.append(EarconEvent(ZONE_ENTER if zone else ZONE_EXIT, t_next))
        state.in_zone = zone

    events.sort(key=lambda e: e.time)
    return events


def render_earcon(kind: str, cfg: SynthConfig) -> AudioBlock:
    """Waveform of a discrete cue.

    Zone events gate the noise bed inside the synthesizer and carry no
    waveform of their own (empty block).
    """
    sr = cfg.sample_rate
    if kind == CLICK:
        n = round(_CLICK_SECONDS * sr)
        rng = np.random.default_rng(_CLICK_SEED)
        burst = rng.standard_normal(n) * np.hanning(n)
        burst *= _CLICK_PEAK / np.max(np.abs(burst))
        return AudioBlock(sr, burst)
    if kind == TRIAD:
        n = round(_TRIAD_SECONDS * sr)
        t = np.arange(n) / sr
        tone = np.zeros(n)
        for f in _TRIAD_FREQS_HZ:
            tone += np.sin(2.0 * np.pi * f * t)
        tone *= np.exp(-t / (_TRIAD_SECONDS / 5.0))
        fade = min(n, round(0.005 * sr))   # remove the cut-off edge
        tone[-fade:] *= np.linspace(1.0, 0.0, fade)
        tone *= _TRIAD_PEAK / np.max(np.abs(tone))
        return AudioBlock(sr, tone)
    if kind in (ZONE_ENTER, ZONE_EXIT):
        return AudioBlock(sr, np.zeros(0))
    raise ValueError(f"unknown earcon kind: {kind!r}")
