"""Timeline rendering: a position stream in, continuous audio out.

One :class:`GuideRenderer` instance advances block by block; the
offline :func:`render_stream` and the live guidance service both drive
the same instance type with the same block schedule, which is what
makes an offline re-render of a session log bit-identical to the audio
the service streamed.
"""

from __future__ import annotations

import math

import numpy as np

from .earcons import EarconEvent, detect_events, init_crossing_state, render_earcon
from .mapping import DisplacementVector, MappingConfig, map_position
from .synth import AudioBlock, SynthConfig, _soft_clip, init_synth, render_into
from .trajectory import Trajectory

__all__ = ["StreamError", "GuideRenderer", "render_stream", "blocks_due"]


class StreamError(ValueError):
    """Invalid position stream."""


def blocks_due(t: float, sample_rate: int, block_size: int) -> int:
    """Number of whole blocks a stream clock at time ``t`` has made due.

    The one and only timestamp-to-block-boundary comparison: the live
    service and the offline replay must agree bit-for-bit on which side
    of a block edge an update falls, so both call this.
    """
    return int(math.floor(t * sample_rate / block_size))


class GuideRenderer:
    """Block-by-block guidance renderer with earcons mixed in.

    Single-owner, like the synth state it wraps.  Feed it one position
    per block; it advances its own clock by exactly one block per call.
    """

    def __init__(
        self,
        mapping_cfg: MappingConfig | None = None,
        synth_cfg: SynthConfig | None = None,
        mode: str = "3d",
        mix_earcons: bool = True,
    ):
        self.mapping_cfg = mapping_cfg if mapping_cfg is not None else MappingConfig()
        self.synth_cfg = synth_cfg if synth_cfg is not None else SynthConfig()
        self.mode = mode
        self.mix_earcons = mix_earcons
        self.state = init_synth(self.synth_cfg)
        self.blocks_rendered = 0
        self._crossing = None
        self._prev_pos: DisplacementVector | None = None
        self._active: list[tuple[np.ndarray, int]] = []  # (waveform, absolute start sample)
        self._earcon_cache: dict[str, np.ndarray] = {}
        self._block64 = np.empty(self.synth_cfg.block_size, dtype=np.float64)
        self._block32 = np.empty(self.synth_cfg.block_size, dtype=np.float32)

    @property
    def block_seconds(self) -> float:
        return self.synth_cfg.block_size / self.synth_cfg.sample_rate

    @property
    def clock(self) -> float:
        """Stream time at which the next block starts."""
        return self.blocks_rendered * self.block_seconds

    def _earcon(self, kind: str) -> np.ndarray:
        wave = self._earcon_cache.get(kind)
        if wave is None:
            wave = np.asarray(render_earcon(kind, self.synth_cfg).frames, dtype=np.float64)
            self._earcon_cache[kind] = wave
        return wave

    def render_next(self, position: DisplacementVector) -> tuple[np.ndarray, list[EarconEvent]]:
        """Render the next block with the given position held throughout.

        Returns a fresh float32 array and the cues fired by the move
        from the previous block's position to this one.
        """
        cfg = self.synth_cfg
        t_start = self.clock
        t_end = t_start + self.block_seconds

        if self._crossing is None:
            self._crossing = init_crossing_state(position, self.mapping_cfg, self.mode)
            self._prev_pos = position
            events: list[EarconEvent] = []
        else:
            events = detect_events(
                self._prev_pos, position, self._crossing, self.mapping_cfg,
                t_prev=t_start - self.block_seconds, t_next=t_start,
            )
            self._prev_pos = position

        params = map_position(position, self.mapping_cfg)
        render_into(self.state, params, cfg, self._block32, self.mapping_cfg)
        mix = self._block64
        mix[:] = self._block32

        s0 = self.blocks_rendered * cfg.block_size
        s1 = s0 + cfg.block_size
        if self.mix_earcons:
            for event in events:
                # logged times estimate the physical crossing; the waveform
                # starts at the first sample not yet rendered
                wave = self._earcon(event.kind)
                if wave.size:
                    self._active.append((wave, s0))

        if self._active:
            still: list[tuple[np.ndarray, int]] = []
            for wave, start in self._active:
                lo = max(start, s0)
                hi = min(start + wave.size, s1)
                if lo < hi:
                    mix[lo - s0:hi - s0] += wave[lo - start:hi - start]
                if start + wave.size > s1:
                    still.append((wave, start))
            self._active = still
            _soft_clip(mix)   # headroom guard for tone + earcon overlaps

        self.blocks_rendered += 1
        return mix.astype(np.float32), events


def _positions_seq(positions) -> list[tuple[float, DisplacementVector]]:
    seq = list(positions)
    if not seq:
        raise StreamError("empty position sequence")
    times = [t for t, _ in seq]
    for a, b in zip(times, times[1:]):
        if b <= a:
            raise StreamError(f"timestamps must be strictly increasing ({a} -> {b})")
    return seq


def render_stream(
    positions,
    mapping_cfg: MappingConfig | None = None,
    synth_cfg: SynthConfig | None = None,
    mode: str = "3d",
    duration: float | None = None,
    interpolate: bool = True,
    earcons: bool = True,
) -> tuple[AudioBlock, list[EarconEvent]]:
    """Render a full timeline of (time, DisplacementVector) positions.

    The output spans [0, duration] (default: the last timestamp); the
    position is held before the first and after the last sample.  With
    ``interpolate`` the path moves linearly between samples, otherwise
    each sample holds until the next one (the service's semantics).
    ``earcons=False`` leaves the discrete cues out of the mix (events
    are still detected and returned).
    """
    seq = _positions_seq(positions)
    if duration is None:
        duration = seq[-1][0]
    if duration < 0.0 or not math.isfinite(duration):
        raise StreamError(f"invalid duration {duration}")

    traj = Trajectory(tuple(seq), mode="3d")
    renderer = GuideRenderer(mapping_cfg, synth_cfg, mode, mix_earcons=earcons)
    cfg = renderer.synth_cfg
    total_frames = round(duration * cfg.sample_rate)
    n_blocks = math.ceil(total_frames / cfg.block_size) if total_frames else 0

    out = np.empty(n_blocks * cfg.block_size, dtype=np.float32)
    events: list[EarconEvent] = []
    if not interpolate:
        # latest-wins hold on the service's block schedule: block b hears
        # the newest position whose timestamp made at most b blocks due
        dues = np.array([blocks_due(t, cfg.sample_rate, cfg.block_size) for t, _ in seq])
    for b in range(n_blocks):
        if interpolate:
            pos = traj.at(b * renderer.block_seconds)
        else:
            idx = int(np.searchsorted(dues, b, side="right")) - 1
            pos = seq[max(idx, 0)][1]
        block, fired = renderer.render_next(pos)
        out[b * cfg.block_size:(b + 1) * cfg.block_size] = block
        events.extend(fired)
    return AudioBlock(cfg.sample_rate, out[:total_frames]), events
